#pragma once

#include <Eigen/Dense>

namespace markovht {

/// Precomputed reference quantities for the test statistic h(nu) = D(nu || pi):
/// the strictly positive reference law over the pair alphabet and the logs of
/// its row-conditional matrix.
class DivergenceWorkspace {
  public:
    explicit DivergenceWorkspace(const Eigen::VectorXd& reference_law);

    const Eigen::VectorXd& reference() const { return reference_; }
    const Eigen::MatrixXd& conditional_reference() const { return conditional_; }
    const Eigen::MatrixXd& log_conditional_reference() const { return log_conditional_; }
    int n_states() const { return n_states_; }

  private:
    Eigen::VectorXd reference_;
    Eigen::MatrixXd conditional_;
    Eigen::MatrixXd log_conditional_;
    int n_states_;
};

/// Conditional relative entropy between a strictly positive pair law and the
/// workspace reference:
///   sum_ij gamma_ij * log[(gamma_ij / sum_t gamma_it) / (pi_ij / sum_t pi_it)].
/// Nonnegative; tiny negative floating-point results are clamped to zero.
double relative_entropy(const Eigen::VectorXd& gamma, const DivergenceWorkspace& ws);

/// Gradient of h at nu: component (i,j) is
///   log nu_ij - log(sum_t nu_it) - log pi_ij + log(sum_t pi_it).
Eigen::VectorXd gradient_h(const Eigen::VectorXd& nu, const DivergenceWorkspace& ws);

/// Hessian of h at nu, exposed as the full (dense) N^2 x N^2 matrix. It is
/// block diagonal with N blocks of size N: within row-group i the diagonal is
/// 1/nu_ij - 1/sum_t nu_it and off-diagonals are -1/sum_t nu_it; cross-group
/// entries are exactly zero.
Eigen::MatrixXd hessian_h(const Eigen::VectorXd& nu);

}  // namespace markovht
