#include "markovht/eval.hpp"

#include <algorithm>
#include <cmath>

#include "markovht/divergence.hpp"
#include "markovht/errors.hpp"
#include "markovht/log.hpp"
#include "markovht/rng.hpp"

namespace markovht {

std::vector<long> ExperimentGrid::sample_sizes(int n_states) {
    const long nn = static_cast<long>(n_states) * n_states;
    const long step = static_cast<long>(std::floor(0.2 * static_cast<double>(nn) + 1.0));
    std::vector<long> sizes;
    for (long n = 2 * nn; n < 6 * nn + 5; n += step) sizes.push_back(n);
    return sizes;
}

void ExperimentGrid::validate() const {
    if (state_counts.empty()) throw input_error("grid has no state counts");
    for (int N : state_counts)
        if (N < 1) throw input_error("state counts must be positive");
    if (repetitions < 1 || paths < 1) throw input_error("grid counts must be positive");
    if (beta <= 0.0 || beta >= 1.0) throw input_error("beta must lie in (0, 1)");
}

TransitionModel random_transition(int n_states, std::uint64_t seed, double min_entry) {
    if (n_states < 1) throw input_error("need at least one state");
    auto rng = make_rng(derive_seed(seed, 0x72616e64ULL));  // "rand" tag
    std::exponential_distribution<double> expo(1.0);
    Eigen::MatrixXd q(n_states, n_states);
    for (int i = 0; i < n_states; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n_states; ++j) {
            q(i, j) = expo(rng);  // Gamma(1) draws: normalized row ~ Dirichlet(1,...,1)
            sum += q(i, j);
        }
        q.row(i) /= sum;
        q.row(i) = q.row(i).cwiseMax(min_entry);
        q.row(i) /= q.row(i).sum();
    }
    return make_model(q);
}

double oracle_threshold(const TransitionModel& model, long n, double beta, long T,
                        std::uint64_t seed) {
    if (T < 1) throw input_error("oracle needs at least one path");
    const DivergenceWorkspace ws((model.pi.array() > 0.0).all()
                                     ? model.pi
                                     : floored_law(model.pi, kDefaultFloorEps));
    std::vector<double> samples(static_cast<std::size_t>(T));
    for (long t = 0; t < T; ++t) {
        const SymbolSequence path =
            simulate_path(model, n, derive_seed(seed, 0x6f7261636cULL, static_cast<std::uint64_t>(t)));
        const EmpiricalLaw gamma = empirical_law(path, model.alphabet);
        samples[static_cast<std::size_t>(t)] = relative_entropy(gamma.gamma, ws);
    }
    std::sort(samples.begin(), samples.end());
    return empirical_upper_quantile(samples, beta);
}

double mean_squared_error(const std::vector<double>& estimates,
                          const std::vector<double>& oracle) {
    if (estimates.size() != oracle.size() || estimates.empty())
        throw input_error("mean_squared_error needs equally sized, nonempty lists");
    double acc = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double diff = estimates[i] - oracle[i];
        acc += diff * diff;
    }
    return acc / static_cast<double>(estimates.size());
}

std::vector<AccuracyRow> accuracy_metric(const std::vector<std::string>& methods,
                                         const ExperimentGrid& grid) {
    grid.validate();
    for (const auto& m : methods)
        if (m != "sv" && m != "wc" && m != "wc-chi2")
            throw input_error("unknown accuracy method '" + m + "'");

    std::vector<AccuracyRow> rows;
    for (int N : grid.state_counts) {
        const std::vector<long> sizes = ExperimentGrid::sample_sizes(N);
        const long n0 = 1000L * N * N;

        // estimates[method][n][k], oracle[n][k]
        std::vector<std::vector<std::vector<double>>> estimates(
            methods.size(),
            std::vector<std::vector<double>>(sizes.size()));
        std::vector<std::vector<double>> oracle(sizes.size());

        for (int k = 0; k < grid.repetitions; ++k) {
            const std::uint64_t cell_seed =
                derive_seed(grid.seed, static_cast<std::uint64_t>(N),
                            static_cast<std::uint64_t>(k));
            const TransitionModel model = random_transition(N, cell_seed);
            const SymbolSequence reference =
                simulate_path(model, n0, derive_seed(cell_seed, 0x726566ULL));

            // One raw cache per method serves the whole n grid (the samples
            // are scale-free), matching how the detector amortizes them.
            std::vector<SampleCache> caches;
            ReferenceContext ctx;
            const bool needs_wc =
                std::any_of(methods.begin(), methods.end(),
                            [](const std::string& m) { return m != "sv"; });
            if (needs_wc) ctx = prepare_reference(reference, model.alphabet);
            for (const auto& method : methods) {
                if (method == "sv") {
                    caches.emplace_back();
                    continue;
                }
                const WcBranch branch =
                    method == "wc" ? WcBranch::gaussian : WcBranch::chi2;
                caches.push_back(ordinary_cache(ctx, branch, grid.paths,
                                                derive_seed(cell_seed, 0x636163ULL)));
            }

            for (std::size_t ni = 0; ni < sizes.size(); ++ni) {
                const long n = sizes[ni];
                oracle[ni].push_back(oracle_threshold(
                    model, n, grid.beta, grid.paths,
                    derive_seed(cell_seed, 0x2aULL, static_cast<std::uint64_t>(n))));
                for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                    const double eta =
                        methods[mi] == "sv"
                            ? sanov_threshold(n, grid.beta).eta
                            : quantile_threshold(caches[mi], n, grid.beta).eta;
                    estimates[mi][ni].push_back(eta);
                }
            }
            log_debug("accuracy N=%d repetition %d/%d done", N, k + 1, grid.repetitions);
        }

        for (std::size_t mi = 0; mi < methods.size(); ++mi)
            for (std::size_t ni = 0; ni < sizes.size(); ++ni)
                rows.push_back(AccuracyRow{N, sizes[ni], methods[mi],
                                           mean_squared_error(estimates[mi][ni], oracle[ni])});
    }
    return rows;
}

std::vector<RocPoint> roc_experiment(const TransitionModel& null_model,
                                     const TransitionModel& alt_model, long n, long T,
                                     const std::vector<double>& betas,
                                     const std::vector<std::string>& methods,
                                     std::uint64_t seed) {
    if (null_model.alphabet.n_states != alt_model.alphabet.n_states)
        throw input_error("null and alternative models must share an alphabet");
    for (const auto& m : methods)
        if (m != "HTWC-1" && m != "HTWC-2" && m != "HTSV")
            throw input_error("unknown ROC method '" + m + "'");

    const DivergenceWorkspace ws((null_model.pi.array() > 0.0).all()
                                     ? null_model.pi
                                     : floored_law(null_model.pi, kDefaultFloorEps));

    auto divergences = [&](const TransitionModel& source, std::uint64_t tag) {
        std::vector<double> d(static_cast<std::size_t>(T));
        for (long t = 0; t < T; ++t) {
            const SymbolSequence path =
                simulate_path(source, n, derive_seed(seed, tag, static_cast<std::uint64_t>(t)));
            d[static_cast<std::size_t>(t)] =
                relative_entropy(empirical_law(path, source.alphabet).gamma, ws);
        }
        return d;
    };
    const std::vector<double> negative = divergences(null_model, 0x6e656764ULL);
    const std::vector<double> positive = divergences(alt_model, 0x706f7364ULL);

    // Thresholds use the exact null law; one cache per WC branch serves all betas.
    ReferenceContext ctx;
    const bool needs_wc = std::any_of(methods.begin(), methods.end(),
                                      [](const std::string& m) { return m != "HTSV"; });
    if (needs_wc) ctx = prepare_reference(null_model);
    SampleCache gaussian_cache, chi2_cache;
    for (const auto& m : methods) {
        if (m == "HTWC-1")
            gaussian_cache =
                ordinary_cache(ctx, WcBranch::gaussian, T, derive_seed(seed, 0x77633161ULL));
        if (m == "HTWC-2")
            chi2_cache =
                ordinary_cache(ctx, WcBranch::chi2, T, derive_seed(seed, 0x77633262ULL));
    }

    auto rate_above = [](const std::vector<double>& values, double eta) {
        long hits = 0;
        for (double v : values)
            if (v > eta) ++hits;
        return static_cast<double>(hits) / static_cast<double>(values.size());
    };

    std::vector<RocPoint> points;
    for (double beta : betas) {
        for (const auto& m : methods) {
            double eta = 0.0;
            if (m == "HTSV")
                eta = sanov_threshold(n, beta).eta;
            else if (m == "HTWC-1")
                eta = quantile_threshold(gaussian_cache, n, beta).eta;
            else
                eta = quantile_threshold(chi2_cache, n, beta).eta;
            points.push_back(RocPoint{beta, rate_above(negative, eta),
                                      rate_above(positive, eta), m});
        }
    }
    return points;
}

std::vector<double> default_roc_betas() {
    std::vector<double> betas{0.001};
    for (int i = 1; i <= 19; ++i) betas.push_back(0.01 * i);
    return betas;
}

std::vector<ThresholdCurvePoint> threshold_curve(int n_states, double beta, long T,
                                                 std::uint64_t seed) {
    const TransitionModel model = random_transition(n_states, derive_seed(seed, 0x6d646cULL));
    const SymbolSequence reference = simulate_path(
        model, 1000L * n_states * n_states, derive_seed(seed, 0x726566ULL));
    const ReferenceContext ctx = prepare_reference(reference, model.alphabet);
    const SampleCache gaussian =
        ordinary_cache(ctx, WcBranch::gaussian, T, derive_seed(seed, 0x6763ULL));
    const SampleCache chi2 =
        ordinary_cache(ctx, WcBranch::chi2, T, derive_seed(seed, 0x6363ULL));

    std::vector<ThresholdCurvePoint> points;
    for (long n : ExperimentGrid::sample_sizes(n_states)) {
        points.push_back({n_states, n, "oracle",
                          oracle_threshold(model, n, beta, T,
                                           derive_seed(seed, 0x2aULL,
                                                       static_cast<std::uint64_t>(n)))});
        points.push_back({n_states, n, "wc", quantile_threshold(gaussian, n, beta).eta});
        points.push_back({n_states, n, "wc-chi2", quantile_threshold(chi2, n, beta).eta});
        points.push_back({n_states, n, "sv", sanov_threshold(n, beta).eta});
    }
    return points;
}

}  // namespace markovht
