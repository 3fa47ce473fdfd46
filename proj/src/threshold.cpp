#include "markovht/threshold.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cmath>
#include <string>

#include "markovht/divergence.hpp"
#include "markovht/errors.hpp"
#include "markovht/log.hpp"
#include "markovht/rng.hpp"

namespace markovht {

namespace {

std::atomic<long> g_cache_builds{0};

Eigen::MatrixXd sqrt_factor(const CovarianceModel& cov) {
    // Lambda = B B' with B = basis * diag(sqrt(max(eigenvalue, 0))).
    Eigen::VectorXd root = cov.eigenvalues.cwiseMax(0.0).cwiseSqrt();
    return cov.basis * root.asDiagonal();
}

// One Gaussian quadratic-form draw per (seed, law_tag, t) substream.
void fill_gaussian_samples(std::vector<double>& out, const Eigen::MatrixXd& factor,
                           const Eigen::MatrixXd& hess, long T, std::uint64_t seed,
                           int law_tag) {
    const Eigen::Index dim = factor.rows();
    Eigen::VectorXd xi(dim), u(dim);
    for (long t = 0; t < T; ++t) {
        auto rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(law_tag),
                                        static_cast<std::uint64_t>(t)));
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (Eigen::Index k = 0; k < dim; ++k) xi[k] = gauss(rng);
        u.noalias() = factor * xi;
        out[static_cast<std::size_t>(t)] = u.dot(hess * u);
    }
}

void warn_small_cache(long T) {
    if (T < 100) log_warn("cache of only %ld samples; quantiles will be unreliable", T);
}

}  // namespace

PsdRepairResult psd_repair(const Eigen::MatrixXd& symmetric, double floor) {
    if (symmetric.rows() != symmetric.cols())
        throw input_error("psd repair needs a square matrix");
    if ((symmetric - symmetric.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw input_error("psd repair needs a symmetric matrix; symmetrize first");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
    if (solver.info() != Eigen::Success)
        throw numerical_error("eigendecomposition failed during PSD repair");
    PsdRepairResult result;
    result.eigenvalues = solver.eigenvalues();
    result.basis = solver.eigenvectors();
    for (Eigen::Index i = 0; i < result.eigenvalues.size(); ++i) {
        if (result.eigenvalues[i] < floor) {
            result.repair_log.push_back(result.eigenvalues[i]);
            result.eigenvalues[i] = floor;
        }
    }
    result.matrix =
        result.basis * result.eigenvalues.asDiagonal() * result.basis.transpose();
    return result;
}

CovarianceModel covariance(const TransitionModel& model, double tol, int max_m) {
    if (max_m < 1) throw input_error("max_m must be positive");
    const Eigen::VectorXd& pi = model.pi;

    // Lag-zero term pi_i (I_ij - pi_j).
    Eigen::MatrixXd lambda = -pi * pi.transpose();
    lambda.diagonal() += pi;

    // Lagged terms, accumulated until P^m has mixed to pi within tol.
    Eigen::MatrixXd power = model.p;
    int used = 0;
    for (int step = 1; step <= max_m; ++step) {
        const Eigen::MatrixXd centered = power.rowwise() - pi.transpose();
        const Eigen::MatrixXd lagged = pi.asDiagonal() * centered;
        lambda += lagged + lagged.transpose();
        used = step;
        const double residual = centered.cwiseAbs().maxCoeff();
        if (residual < tol) break;
        if (step == max_m) {
            char detail[96];
            std::snprintf(detail, sizeof detail,
                          "covariance series not converged after %d terms (residual %.3e)",
                          max_m, residual);
            throw convergence_error(detail, residual);
        }
        power *= model.p;
    }

    Eigen::MatrixXd symmetrized = 0.5 * (lambda + lambda.transpose());
    PsdRepairResult repaired = psd_repair(symmetrized);
    CovarianceModel cov;
    cov.lambda = std::move(repaired.matrix);
    cov.eigenvalues = std::move(repaired.eigenvalues);
    cov.basis = std::move(repaired.basis);
    cov.truncation_m = used;
    cov.repair_log = std::move(repaired.repair_log);
    return cov;
}

CovarianceModel covariance_from_matrix(const Eigen::MatrixXd& lambda, double floor) {
    Eigen::MatrixXd symmetrized = 0.5 * (lambda + lambda.transpose());
    PsdRepairResult repaired = psd_repair(symmetrized, floor);
    CovarianceModel cov;
    cov.lambda = std::move(repaired.matrix);
    cov.eigenvalues = std::move(repaired.eigenvalues);
    cov.basis = std::move(repaired.basis);
    cov.truncation_m = 0;
    cov.repair_log = std::move(repaired.repair_log);
    return cov;
}

long sample_cache_builds() { return g_cache_builds.load(); }

SampleCache gaussian_sample_cache(const CovarianceModel& cov, const Eigen::MatrixXd& hess,
                                  long T, std::uint64_t seed, int law_tag) {
    if (T < 1) throw input_error("cache size T must be positive");
    if (hess.rows() != cov.lambda.rows() || hess.cols() != cov.lambda.cols())
        throw input_error("hessian and covariance dimensions differ");
    warn_small_cache(T);
    SampleCache cache;
    cache.method = CacheMethod::gaussian;
    cache.seed = seed;
    cache.raw.resize(static_cast<std::size_t>(T));
    fill_gaussian_samples(cache.raw, sqrt_factor(cov), hess, T, seed, law_tag);
    std::sort(cache.raw.begin(), cache.raw.end());
    ++g_cache_builds;
    return cache;
}

Eigen::VectorXd chi2_mixture_weights(const Eigen::MatrixXd& hess,
                                     const CovarianceModel& cov) {
    if (hess.rows() != cov.lambda.rows())
        throw input_error("hessian and covariance dimensions differ");
    Eigen::EigenSolver<Eigen::MatrixXd> solver(hess * cov.lambda);
    if (solver.info() != Eigen::Success)
        throw numerical_error("eigendecomposition of hess * Lambda failed");
    const Eigen::VectorXcd values = solver.eigenvalues();
    Eigen::VectorXd rho(values.size());
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        if (std::abs(values[k].imag()) > 1e-8)
            throw numerical_error("hess * Lambda eigenvalue has imaginary part " +
                                  std::to_string(values[k].imag()) +
                                  "; chi-square branch unstable here");
        rho[k] = std::max(values[k].real(), 0.0);
    }
    std::sort(rho.data(), rho.data() + rho.size(), std::greater<double>());
    return rho;
}

SampleCache chi2_sample_cache(const Eigen::VectorXd& rho, long T, std::uint64_t seed) {
    if (T < 1) throw input_error("cache size T must be positive");
    if ((rho.array() < 0.0).any())
        throw input_error("chi-square mixture weights must be nonnegative");
    warn_small_cache(T);
    SampleCache cache;
    cache.method = CacheMethod::chi2;
    cache.seed = seed;
    cache.raw.resize(static_cast<std::size_t>(T));
    for (long t = 0; t < T; ++t) {
        auto rng = make_rng(derive_seed(seed, 0, static_cast<std::uint64_t>(t)));
        std::normal_distribution<double> gauss(0.0, 1.0);
        double s = 0.0;
        for (Eigen::Index k = 0; k < rho.size(); ++k) {
            const double z = gauss(rng);
            s += rho[k] * z * z;
        }
        cache.raw[static_cast<std::size_t>(t)] = s;
    }
    std::sort(cache.raw.begin(), cache.raw.end());
    ++g_cache_builds;
    return cache;
}

std::string to_string(ThresholdMethod m) {
    switch (m) {
        case ThresholdMethod::sanov: return "sanov";
        case ThresholdMethod::wc_gaussian: return "wc-gaussian";
        case ThresholdMethod::wc_chi2: return "wc-chi2";
        case ThresholdMethod::wc_robust: return "wc-robust";
    }
    return "unknown";
}

double empirical_upper_quantile(const std::vector<double>& sorted_ascending, double beta) {
    if (sorted_ascending.empty()) throw input_error("quantile of an empty sample set");
    if (beta <= 0.0 || beta >= 1.0) throw input_error("beta must lie in (0, 1)");
    const auto T = static_cast<double>(sorted_ascending.size());
    // Guard against products landing a hair above an exact integer.
    const auto k = static_cast<std::size_t>(std::ceil((1.0 - beta) * T - 1e-9));
    if (k > sorted_ascending.size())
        throw numerical_error("beta too small to resolve a quantile from " +
                              std::to_string(sorted_ascending.size()) + " samples");
    return sorted_ascending[k == 0 ? 0 : k - 1];
}

ThresholdEstimate quantile_threshold(const SampleCache& cache, long n, double beta) {
    if (n < 1) throw input_error("sample size n must be positive");
    ThresholdEstimate est;
    est.eta = empirical_upper_quantile(cache.raw, beta) / (2.0 * static_cast<double>(n));
    est.method = cache.method == CacheMethod::chi2      ? ThresholdMethod::wc_chi2
                 : cache.method == CacheMethod::robust  ? ThresholdMethod::wc_robust
                                                        : ThresholdMethod::wc_gaussian;
    est.n = n;
    est.beta = beta;
    est.T = static_cast<long>(cache.raw.size());
    est.seed = cache.seed;
    return est;
}

ThresholdEstimate sanov_threshold(long n, double beta) {
    if (n < 1) throw input_error("sample size n must be positive");
    if (beta <= 0.0 || beta > 1.0) throw input_error("beta must lie in (0, 1]");
    ThresholdEstimate est;
    est.eta = -std::log(beta) / static_cast<double>(n);
    est.method = ThresholdMethod::sanov;
    est.n = n;
    est.beta = beta;
    return est;
}

ReferenceContext prepare_reference(const TransitionModel& model, double eps, double tol,
                                   int max_m) {
    ReferenceContext ref;
    ref.law = (model.pi.array() > 0.0).all() ? model.pi : floored_law(model.pi, eps);
    ref.hess = hessian_h(ref.law);
    ref.cov = covariance(model, tol, max_m);
    ref.model = model;
    return ref;
}

ReferenceContext prepare_reference(const SymbolSequence& reference, const Alphabet& alphabet,
                                   double eps, double tol, int max_m) {
    const long min_len = 500L * alphabet.pair_size();
    if (static_cast<long>(reference.size()) < min_len)
        throw input_error("reference path has " + std::to_string(reference.size()) +
                          " symbols; need at least 500 * N^2 = " + std::to_string(min_len));
    EmpiricalLaw law = empirical_law(reference, alphabet, eps);
    ReferenceContext ref;
    ref.law = law.gamma;
    ref.hess = hessian_h(ref.law);
    // Re-estimated chain: conditional rows of the empirical law, lifted. The
    // covariance series runs on that chain's own stationary law so the
    // adaptive truncation has a well-defined limit.
    ref.model = make_model(conditional_rows(ref.law));
    ref.cov = covariance(ref.model, tol, max_m);
    return ref;
}

SampleCache ordinary_cache(const ReferenceContext& ref, WcBranch branch, long T,
                           std::uint64_t seed) {
    if (branch == WcBranch::chi2)
        return chi2_sample_cache(chi2_mixture_weights(ref.hess, ref.cov), T, seed);
    return gaussian_sample_cache(ref.cov, ref.hess, T, seed);
}

SampleCache robust_cache(const std::vector<ReferenceContext>& refs, long T,
                         std::uint64_t seed) {
    if (refs.empty()) throw input_error("robust cache needs at least one reference");
    if (T < 1) throw input_error("cache size T must be positive");
    warn_small_cache(T);

    std::vector<Eigen::MatrixXd> factors;
    factors.reserve(refs.size());
    for (const auto& ref : refs) factors.push_back(sqrt_factor(ref.cov));

    SampleCache cache;
    cache.method = CacheMethod::robust;
    cache.seed = seed;
    cache.raw.resize(static_cast<std::size_t>(T));
    std::vector<double> draw(refs.size());
    std::vector<double> per_law(static_cast<std::size_t>(T));
    for (std::size_t l = 0; l < refs.size(); ++l) {
        fill_gaussian_samples(per_law, factors[l], refs[l].hess, T, seed,
                              static_cast<int>(l));
        for (long t = 0; t < T; ++t) {
            auto& slot = cache.raw[static_cast<std::size_t>(t)];
            const double v = per_law[static_cast<std::size_t>(t)];
            slot = (l == 0) ? v : std::min(slot, v);
        }
    }
    std::sort(cache.raw.begin(), cache.raw.end());
    ++g_cache_builds;
    return cache;
}

namespace {

ThresholdEstimate finish_estimate(const ReferenceContext& ref, const SampleCache& cache,
                                  long n, double beta) {
    ThresholdEstimate est = quantile_threshold(cache, n, beta);
    est.truncation_m = ref.cov.truncation_m;
    est.repaired_eigencount = static_cast<int>(ref.cov.repair_log.size());
    return est;
}

}  // namespace

ThresholdEstimate estimate_threshold_ordinary(const TransitionModel& reference, long n,
                                              double beta, long T, std::uint64_t seed,
                                              WcBranch branch, double eps) {
    ReferenceContext ref = prepare_reference(reference, eps);
    return finish_estimate(ref, ordinary_cache(ref, branch, T, seed), n, beta);
}

ThresholdEstimate estimate_threshold_ordinary(const SymbolSequence& reference,
                                              const Alphabet& alphabet, long n, double beta,
                                              long T, std::uint64_t seed, WcBranch branch,
                                              double eps) {
    ReferenceContext ref = prepare_reference(reference, alphabet, eps);
    return finish_estimate(ref, ordinary_cache(ref, branch, T, seed), n, beta);
}

ThresholdEstimate estimate_threshold_robust(const std::vector<ReferenceContext>& refs,
                                            long n, double beta, long T,
                                            std::uint64_t seed) {
    SampleCache cache = robust_cache(refs, T, seed);
    ThresholdEstimate est = quantile_threshold(cache, n, beta);
    est.method = ThresholdMethod::wc_robust;
    for (const auto& ref : refs) {
        est.truncation_m = std::max(est.truncation_m, ref.cov.truncation_m);
        est.repaired_eigencount += static_cast<int>(ref.cov.repair_log.size());
    }
    return est;
}

}  // namespace markovht
