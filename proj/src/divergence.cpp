#include "markovht/divergence.hpp"

#include <cmath>
#include <string>

#include "markovht/errors.hpp"
#include "markovht/markov.hpp"

namespace markovht {

namespace {

int square_side(Eigen::Index m) {
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
    if (static_cast<Eigen::Index>(n) * n != m)
        throw input_error("pair law length is not a perfect square");
    return n;
}

void require_positive(const Eigen::VectorXd& v, const char* who) {
    if ((v.array() <= 0.0).any())
        throw input_error(std::string(who) +
                          " requires strictly positive entries; floor the law upstream");
}

}  // namespace

DivergenceWorkspace::DivergenceWorkspace(const Eigen::VectorXd& reference_law)
    : reference_(reference_law), n_states_(square_side(reference_law.size())) {
    require_positive(reference_, "divergence reference");
    conditional_ = conditional_rows(reference_);
    log_conditional_ = conditional_.array().log();
}

double relative_entropy(const Eigen::VectorXd& gamma, const DivergenceWorkspace& ws) {
    require_positive(gamma, "relative_entropy");
    const int n = ws.n_states();
    if (gamma.size() != static_cast<Eigen::Index>(n) * n)
        throw input_error("law length does not match the workspace alphabet");
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) row_sum += gamma[i * n + j];
        const double log_row = std::log(row_sum);
        for (int j = 0; j < n; ++j) {
            const double g = gamma[i * n + j];
            d += g * (std::log(g) - log_row - ws.log_conditional_reference()(i, j));
        }
    }
    // Clamp floating-point noise near the minimum.
    if (d < 0.0) {
        if (d < -1e-12)
            throw numerical_error("conditional divergence evaluated to " + std::to_string(d));
        d = 0.0;
    }
    return d;
}

Eigen::VectorXd gradient_h(const Eigen::VectorXd& nu, const DivergenceWorkspace& ws) {
    require_positive(nu, "gradient_h");
    const int n = ws.n_states();
    if (nu.size() != static_cast<Eigen::Index>(n) * n)
        throw input_error("law length does not match the workspace alphabet");
    Eigen::VectorXd grad(nu.size());
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) row_sum += nu[i * n + j];
        const double log_row = std::log(row_sum);
        for (int j = 0; j < n; ++j)
            grad[i * n + j] =
                std::log(nu[i * n + j]) - log_row - ws.log_conditional_reference()(i, j);
    }
    return grad;
}

Eigen::MatrixXd hessian_h(const Eigen::VectorXd& nu) {
    require_positive(nu, "hessian_h");
    const int n = square_side(nu.size());
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(nu.size(), nu.size());
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) row_sum += nu[i * n + j];
        const double inv_row = 1.0 / row_sum;
        for (int j = 0; j < n; ++j) {
            for (int l = 0; l < n; ++l) hess(i * n + j, i * n + l) = -inv_row;
            hess(i * n + j, i * n + j) += 1.0 / nu[i * n + j];
        }
    }
    return hess;
}

}  // namespace markovht
