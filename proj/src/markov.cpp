#include "markovht/markov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "markovht/errors.hpp"
#include "markovht/rng.hpp"

namespace markovht {

namespace {

void check_row_stochastic(const Eigen::MatrixXd& q, double tol) {
    if (q.rows() != q.cols() || q.rows() < 1)
        throw input_error("transition matrix must be square and nonempty");
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        if ((q.row(i).array() < 0.0).any())
            throw input_error("transition matrix has a negative entry in row " +
                              std::to_string(i + 1));
        const double s = q.row(i).sum();
        if (std::abs(s - 1.0) > tol)
            throw input_error("row " + std::to_string(i + 1) +
                              " of transition matrix sums to " + std::to_string(s));
    }
}

// Inverse-CDF draw from a probability vector. Linear scan; rows are small.
int draw_categorical(const Eigen::VectorXd& prob, double u) {
    double acc = 0.0;
    const Eigen::Index last = prob.size() - 1;
    for (Eigen::Index k = 0; k < last; ++k) {
        acc += prob[k];
        if (u < acc) return static_cast<int>(k) + 1;
    }
    return static_cast<int>(last) + 1;
}

}  // namespace

Alphabet::Alphabet(int n) : n_states(n) {
    if (n < 1) throw input_error("alphabet needs at least one state");
}

SymbolSequence pair_encode(const std::vector<int>& y, const Alphabet& alphabet) {
    if (y.size() < 2) throw input_error("pair encoding needs at least two observations");
    SymbolSequence z;
    z.symbols.reserve(y.size() - 1);
    for (std::size_t l = 0; l < y.size(); ++l) {
        if (y[l] < 1 || y[l] > alphabet.n_states)
            throw input_error("state " + std::to_string(y[l]) + " at position " +
                              std::to_string(l) + " outside 1.." +
                              std::to_string(alphabet.n_states));
        if (l > 0) z.symbols.push_back(alphabet.pair_index(y[l - 1], y[l]));
    }
    return z;
}

Eigen::MatrixXd lift_transition(const Eigen::MatrixXd& q) {
    check_row_stochastic(q, 1e-9);
    const int n = static_cast<int>(q.rows());
    const int m = n * n;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m, m);
    // row (k,l), column (i,j): mass q(i,j) iff the pair states chain (i == l)
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            for (int j = 0; j < n; ++j) p(k * n + l, l * n + j) = q(l, j);
    return p;
}

Eigen::VectorXd stationary_law(const Eigen::MatrixXd& p, double tol, int max_iter) {
    check_row_stochastic(p, 1e-9);
    const Eigen::Index m = p.rows();
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    double residual = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd next = p.transpose() * pi;
        next /= next.sum();
        residual = (next.transpose() * p - next.transpose()).cwiseAbs().maxCoeff();
        pi = std::move(next);
        if (residual <= tol) return pi;
    }
    char detail[96];
    std::snprintf(detail, sizeof detail,
                  "stationary law did not converge after %d iterations (residual %.3e)",
                  max_iter, residual);
    throw convergence_error(detail, residual);
}

Eigen::MatrixXd conditional_rows(const Eigen::VectorXd& pi) {
    const int m = static_cast<int>(pi.size());
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
    if (n * n != m) throw input_error("pair law length is not a perfect square");
    if ((pi.array() <= 0.0).any())
        throw input_error("conditional rows need a strictly positive law; floor it first");
    Eigen::MatrixXd q(n, n);
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) row_sum += pi[i * n + j];
        if (row_sum <= 0.0)
            throw numerical_error("zero row-group mass for state " + std::to_string(i + 1));
        for (int j = 0; j < n; ++j) q(i, j) = pi[i * n + j] / row_sum;
    }
    return q;
}

TransitionModel make_model(const Eigen::MatrixXd& q, double stationary_tol, int max_iter) {
    Eigen::MatrixXd p = lift_transition(q);
    Eigen::VectorXd pi = stationary_law(p, stationary_tol, max_iter);
    return TransitionModel{Alphabet(static_cast<int>(q.rows())), q, std::move(p),
                           std::move(pi)};
}

SymbolSequence simulate_path(const TransitionModel& model, long n, std::uint64_t seed) {
    if (n < 1) throw input_error("path length must be positive");
    const int N = model.alphabet.n_states;
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    SymbolSequence z;
    z.symbols.reserve(static_cast<std::size_t>(n));
    // First pair state from pi, then the original chain drives the rest:
    // (i, j) -> (j, j') with j' ~ q row j.
    int first = draw_categorical(model.pi, u01(rng));
    z.symbols.push_back(first);
    int y = model.alphabet.pair_state(first).second;
    for (long l = 1; l < n; ++l) {
        const int y_next = draw_categorical(model.q.row(y - 1).transpose(), u01(rng));
        z.symbols.push_back(model.alphabet.pair_index(y, y_next));
        y = y_next;
    }
    return z;
}

EmpiricalLaw empirical_law(const SymbolSequence& z, const Alphabet& alphabet, double eps) {
    if (z.empty()) throw input_error("empirical law of an empty sequence");
    if (eps <= 0.0) throw input_error("floor eps must be positive");
    const int m = alphabet.pair_size();
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);
    for (int s : z.symbols) {
        if (s < 1 || s > m)
            throw input_error("symbol " + std::to_string(s) + " outside 1.." +
                              std::to_string(m));
        counts[s - 1] += 1.0;
    }
    const double n = static_cast<double>(z.size());
    Eigen::VectorXd gamma = (counts / n).cwiseMax(eps);
    gamma /= gamma.sum();
    return EmpiricalLaw{std::move(gamma), eps, static_cast<long>(z.size())};
}

Eigen::VectorXd floored_law(const Eigen::VectorXd& law, double eps) {
    if (eps <= 0.0) throw input_error("floor eps must be positive");
    Eigen::VectorXd out = law.cwiseMax(eps);
    out /= out.sum();
    return out;
}

}  // namespace markovht
