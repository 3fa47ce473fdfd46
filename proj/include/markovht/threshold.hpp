#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "markovht/markov.hpp"

namespace markovht {

// ---------------------------------------------------------------------------
// Covariance of the scaled empirical measure
// ---------------------------------------------------------------------------

/// Result of symmetrizing and eigenvalue-flooring a covariance estimate.
/// `matrix` is the repaired PSD matrix; `eigenvalues`/`basis` are its
/// (post-repair) spectral pieces, reused for Gaussian sampling; `repair_log`
/// records the original value of every floored eigenvalue.
struct PsdRepairResult {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd basis;  // columns are eigenvectors
    std::vector<double> repair_log;
};

/// Eigenvalue-floor repair of a symmetric matrix: eigenvalues below `floor`
/// are replaced by `floor` and the matrix is recomposed.
PsdRepairResult psd_repair(const Eigen::MatrixXd& symmetric, double floor = 1e-12);

/// Long-run covariance of the scaled empirical pair measure sqrt(n)(Gamma_n - pi):
///   Lambda_ij = pi_i (I_ij - pi_j) + sum_{m=1..m0} [pi_i (P^m_ij - pi_j)
///                                                   + pi_j (P^m_ji - pi_i)],
/// truncated adaptively (stop once max_ij |P^m_ij - pi_j| < tol), then
/// symmetrized and PSD-repaired.
struct CovarianceModel {
    Eigen::MatrixXd lambda;      // symmetric, PSD after repair
    Eigen::VectorXd eigenvalues; // post-repair spectrum
    Eigen::MatrixXd basis;       // orthonormal eigenvectors (columns)
    int truncation_m = 0;        // series terms actually used
    std::vector<double> repair_log;
};

CovarianceModel covariance(const TransitionModel& model, double tol = 1e-12,
                           int max_m = 5000);

/// Assemble a CovarianceModel from an explicit symmetric matrix (repairs it).
/// Mostly useful in tests and for degenerate references.
CovarianceModel covariance_from_matrix(const Eigen::MatrixXd& lambda,
                                       double floor = 1e-12);

// ---------------------------------------------------------------------------
// Sample caches and quantile thresholds
// ---------------------------------------------------------------------------

enum class CacheMethod { gaussian, chi2, robust };

/// Monte-Carlo draws of the scale-free statistic (the 2n * divergence proxy).
/// Raw samples carry no 1/(2n) factor, so one cache serves every window size.
/// Sorted ascending once built; immutable afterwards.
struct SampleCache {
    std::vector<double> raw;
    CacheMethod method = CacheMethod::gaussian;
    std::uint64_t seed = 0;
};

/// Number of sample caches built so far in this process (diagnostic; lets
/// callers verify that detection reuses one cache instead of rebuilding).
long sample_cache_builds();

/// T draws of S = U' H U with U ~ N(0, Lambda), sampled through the repaired
/// eigenfactorization of Lambda. `law_tag` selects the RNG substream; the
/// robust builder uses one tag per law so a single-law robust cache is
/// bit-identical to the ordinary one.
SampleCache gaussian_sample_cache(const CovarianceModel& cov, const Eigen::MatrixXd& hess,
                                  long T, std::uint64_t seed, int law_tag = 0);

/// Mixture weights for the chi-square form of the limit: eigenvalues of
/// hess * Lambda with imaginary parts below 1e-8 discarded and negative real
/// parts floored at zero. Throws numerical_error on material imaginary parts.
Eigen::VectorXd chi2_mixture_weights(const Eigen::MatrixXd& hess,
                                     const CovarianceModel& cov);

/// T draws of sum_k rho_k * Chi2_1k with independent one-degree chi-squares.
SampleCache chi2_sample_cache(const Eigen::VectorXd& rho, long T, std::uint64_t seed);

enum class ThresholdMethod { sanov, wc_gaussian, wc_chi2, wc_robust };

std::string to_string(ThresholdMethod m);

struct ThresholdEstimate {
    double eta = 0.0;  // nats
    ThresholdMethod method = ThresholdMethod::wc_gaussian;
    long n = 0;
    double beta = 0.0;
    long T = 0;
    std::uint64_t seed = 0;
    int truncation_m = 0;
    int repaired_eigencount = 0;
};

/// Shared order-statistic convention: the k-th ascending entry with
/// k = ceil((1 - beta) * T). Both the Monte-Carlo caches and the
/// direct-simulation oracle go through this function.
double empirical_upper_quantile(const std::vector<double>& sorted_ascending, double beta);

/// eta = s_(ceil((1-beta) T)) / (2n) for the cache's raw order statistics.
ThresholdEstimate quantile_threshold(const SampleCache& cache, long n, double beta);

/// Large-deviations estimate eta = -log(beta) / n.
ThresholdEstimate sanov_threshold(long n, double beta);

// ---------------------------------------------------------------------------
// End-to-end estimators
// ---------------------------------------------------------------------------

enum class WcBranch { gaussian, chi2 };

/// Reference quantities shared by the estimators and the detector: the
/// (floored) law the statistic is measured against, the Hessian of the
/// statistic at that law, and the covariance of the re-estimated chain.
struct ReferenceContext {
    Eigen::VectorXd law;   // strictly positive pair law
    Eigen::MatrixXd hess;  // Hessian at `law`
    CovarianceModel cov;
    TransitionModel model;  // chain the covariance series was computed from
};

/// Exact-model reference: uses the model's stationary law directly (floored
/// only if it has zero entries).
ReferenceContext prepare_reference(const TransitionModel& model,
                                   double eps = kDefaultFloorEps, double tol = 1e-12,
                                   int max_m = 5000);

/// Estimated reference: empirical law of a past sample path (floored at eps),
/// conditional rows -> lifted chain -> covariance. Requires
/// length >= 500 * N^2.
ReferenceContext prepare_reference(const SymbolSequence& reference, const Alphabet& alphabet,
                                   double eps = kDefaultFloorEps, double tol = 1e-12,
                                   int max_m = 5000);

/// Build the Monte-Carlo cache for one reference (branch selects Gaussian
/// quadratic forms or the chi-square mixture).
SampleCache ordinary_cache(const ReferenceContext& ref, WcBranch branch, long T,
                           std::uint64_t seed);

/// Robust cache: raw sample t is min over laws l of U^{(lt)}' H_l U^{(lt)}
/// with independent U^{(lt)} ~ N(0, Lambda_l).
SampleCache robust_cache(const std::vector<ReferenceContext>& refs, long T,
                         std::uint64_t seed);

ThresholdEstimate estimate_threshold_ordinary(const TransitionModel& reference, long n,
                                              double beta, long T, std::uint64_t seed,
                                              WcBranch branch = WcBranch::gaussian,
                                              double eps = kDefaultFloorEps);

ThresholdEstimate estimate_threshold_ordinary(const SymbolSequence& reference,
                                              const Alphabet& alphabet, long n, double beta,
                                              long T, std::uint64_t seed,
                                              WcBranch branch = WcBranch::gaussian,
                                              double eps = kDefaultFloorEps);

ThresholdEstimate estimate_threshold_robust(const std::vector<ReferenceContext>& refs,
                                            long n, double beta, long T,
                                            std::uint64_t seed);

}  // namespace markovht
