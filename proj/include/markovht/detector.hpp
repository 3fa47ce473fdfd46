#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "markovht/markov.hpp"
#include "markovht/threshold.hpp"

namespace markovht {

/// Sliding-window parameters. w_d <= w_s gives overlapping windows; windows
/// holding fewer than min_samples symbols are skipped instead of tested.
struct WindowConfig {
    double w_s = 0.0;      // window size, seconds
    double w_d = 0.0;      // stride between window starts, seconds
    double beta = 1e-3;    // target false positive rate
    int min_samples = 2;
    double eps = kDefaultFloorEps;
};

/// A window's symbol slice: [begin_idx, end_idx) into the stream.
struct WindowSlice {
    double start = 0.0;
    double end = 0.0;
    std::size_t begin_idx = 0;
    std::size_t end_idx = 0;
    bool skipped = false;
    long n() const { return static_cast<long>(end_idx - begin_idx); }
};

/// Outcome for one detection window. flagged is true exactly when
/// stat > eta; skipped windows carry NaN stat/eta and are never flagged.
/// law_index is the 1-based index of the law attaining the robust infimum
/// (0 for the ordinary test and skipped windows).
struct WindowReport {
    double start = 0.0;
    double end = 0.0;
    long n = 0;
    double stat = 0.0;
    double eta = 0.0;
    bool flagged = false;
    bool skipped = false;
    int law_index = 0;
};

/// Reference laws for the robust test, optionally valid only during a
/// time-of-day interval [start, end) in seconds modulo period_seconds.
/// Either every law carries an interval (partitioned; the intervals must
/// tile the period) or none does (all laws apply to every window).
struct LawSchedule {
    struct Entry {
        Eigen::VectorXd law;   // strictly positive pair law
        double start = 0.0;
        double end = 0.0;
        bool has_interval() const { return end > start; }
    };
    std::vector<Entry> laws;
    double period_seconds = 86400.0;

    bool partitioned() const;
    void validate() const;
    /// 1-based indices of the laws valid at absolute time t.
    std::vector<int> applicable(double t) const;
};

/// Cut a timestamped stream into windows [s, s + w_s), s = t0, t0 + w_d, ...
/// while s + w_s <= last timestamp; a stream shorter than one window yields
/// the single window starting at t0. Throws input_error on unsorted
/// timestamps.
std::vector<WindowSlice> sliding_windows(const SymbolSequence& stream,
                                         const WindowConfig& config);

/// Per-window divergences against a single reference law, with eta/flagged
/// left unset. The stats do not depend on the threshold method, so one pass
/// can be re-thresholded several ways.
std::vector<WindowReport> window_statistics(const SymbolSequence& stream,
                                            const Eigen::VectorXd& reference_law,
                                            const Alphabet& alphabet,
                                            const WindowConfig& config);

/// Threshold every non-skipped report from the shared cache at its own n.
std::vector<WindowReport> with_cache_thresholds(std::vector<WindowReport> reports,
                                                const SampleCache& cache, double beta);

/// Threshold every non-skipped report with the large-deviations formula.
std::vector<WindowReport> with_sanov_thresholds(std::vector<WindowReport> reports,
                                                double beta);

/// Ordinary Hoeffding detection: per window, the divergence of the window's
/// empirical law from the reference, thresholded at the cache quantile for
/// the window's own sample count.
std::vector<WindowReport> detect_ordinary(const SymbolSequence& stream,
                                          const Eigen::VectorXd& reference_law,
                                          const Alphabet& alphabet,
                                          const WindowConfig& config,
                                          const SampleCache& cache);

/// Robust detection over a law schedule. For an unpartitioned schedule pass
/// exactly one cache (built over all laws); for a partitioned schedule pass
/// one cache per law, aligned with schedule.laws.
std::vector<WindowReport> detect_robust(const SymbolSequence& stream,
                                        const LawSchedule& schedule,
                                        const Alphabet& alphabet,
                                        const WindowConfig& config,
                                        const std::vector<SampleCache>& caches);

/// Post-filter: indices of candidate values exceeding mean + k_sigma * sd of
/// the reference values (sd uses the n-1 denominator).
std::vector<std::size_t> sigma_refine(const std::vector<double>& candidate_values,
                                      const std::vector<double>& reference_values,
                                      double k_sigma = 3.0);

}  // namespace markovht
