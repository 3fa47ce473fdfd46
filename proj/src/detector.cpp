#include "markovht/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "markovht/divergence.hpp"
#include "markovht/errors.hpp"

namespace markovht {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

WindowReport skipped_report(const WindowSlice& w) {
    WindowReport r;
    r.start = w.start;
    r.end = w.end;
    r.n = w.n();
    r.stat = kNaN;
    r.eta = kNaN;
    r.flagged = false;
    r.skipped = true;
    return r;
}

}  // namespace

bool LawSchedule::partitioned() const {
    return !laws.empty() && laws.front().has_interval();
}

void LawSchedule::validate() const {
    if (laws.empty()) throw config_error("law schedule is empty");
    const bool with_intervals = laws.front().has_interval();
    for (const auto& e : laws)
        if (e.has_interval() != with_intervals)
            throw config_error("schedule mixes laws with and without validity intervals");
    if (!with_intervals) return;
    if (period_seconds <= 0.0) throw config_error("schedule period must be positive");
    // Intervals must tile [0, period) without overlap.
    std::vector<std::pair<double, double>> spans;
    for (const auto& e : laws) {
        if (e.start < 0.0 || e.end > period_seconds || e.end <= e.start)
            throw config_error("law interval outside [0, period)");
        spans.emplace_back(e.start, e.end);
    }
    std::sort(spans.begin(), spans.end());
    double cursor = 0.0;
    for (const auto& [s, t] : spans) {
        if (std::abs(s - cursor) > 1e-9)
            throw config_error("law intervals leave a gap or overlap at t=" +
                               std::to_string(cursor));
        cursor = t;
    }
    if (std::abs(cursor - period_seconds) > 1e-9)
        throw config_error("law intervals do not cover the full period");
}

std::vector<int> LawSchedule::applicable(double t) const {
    std::vector<int> out;
    if (!partitioned()) {
        out.resize(laws.size());
        std::iota(out.begin(), out.end(), 1);
        return out;
    }
    double tod = std::fmod(t, period_seconds);
    if (tod < 0.0) tod += period_seconds;
    for (std::size_t l = 0; l < laws.size(); ++l)
        if (tod >= laws[l].start && tod < laws[l].end) out.push_back(static_cast<int>(l) + 1);
    return out;
}

std::vector<WindowSlice> sliding_windows(const SymbolSequence& stream,
                                         const WindowConfig& config) {
    if (config.w_s <= 0.0 || config.w_d <= 0.0)
        throw input_error("window size and stride must be positive");
    if (stream.empty()) return {};
    if (!stream.timestamped())
        throw input_error("sliding windows need a timestamped stream");
    const auto& ts = stream.timestamps;
    if (!std::is_sorted(ts.begin(), ts.end()))
        throw input_error("stream timestamps must be nondecreasing");

    const double t0 = ts.front();
    const double t_last = ts.back();
    std::vector<WindowSlice> windows;
    for (long k = 0;; ++k) {
        const double start = t0 + static_cast<double>(k) * config.w_d;
        const double end = start + config.w_s;
        if (k > 0 && end > t_last) break;
        WindowSlice w;
        w.start = start;
        w.end = end;
        w.begin_idx = static_cast<std::size_t>(
            std::lower_bound(ts.begin(), ts.end(), start) - ts.begin());
        w.end_idx = static_cast<std::size_t>(
            std::lower_bound(ts.begin(), ts.end(), end) - ts.begin());
        w.skipped = w.n() < config.min_samples;
        windows.push_back(w);
        if (end > t_last) break;  // the guaranteed first window already extends past the data
    }
    return windows;
}

std::vector<WindowReport> window_statistics(const SymbolSequence& stream,
                                            const Eigen::VectorXd& reference_law,
                                            const Alphabet& alphabet,
                                            const WindowConfig& config) {
    const DivergenceWorkspace ws((reference_law.array() > 0.0).all()
                                     ? reference_law
                                     : floored_law(reference_law, config.eps));
    std::vector<WindowReport> reports;
    for (const WindowSlice& w : sliding_windows(stream, config)) {
        if (w.skipped) {
            reports.push_back(skipped_report(w));
            continue;
        }
        SymbolSequence slice;
        slice.symbols.assign(stream.symbols.begin() + static_cast<long>(w.begin_idx),
                             stream.symbols.begin() + static_cast<long>(w.end_idx));
        const EmpiricalLaw gamma = empirical_law(slice, alphabet, config.eps);
        WindowReport r;
        r.start = w.start;
        r.end = w.end;
        r.n = w.n();
        r.stat = relative_entropy(gamma.gamma, ws);
        r.eta = kNaN;
        reports.push_back(r);
    }
    return reports;
}

std::vector<WindowReport> with_cache_thresholds(std::vector<WindowReport> reports,
                                                const SampleCache& cache, double beta) {
    for (auto& r : reports) {
        if (r.skipped) continue;
        r.eta = quantile_threshold(cache, r.n, beta).eta;
        r.flagged = r.stat > r.eta;
    }
    return reports;
}

std::vector<WindowReport> with_sanov_thresholds(std::vector<WindowReport> reports,
                                                double beta) {
    for (auto& r : reports) {
        if (r.skipped) continue;
        r.eta = sanov_threshold(r.n, beta).eta;
        r.flagged = r.stat > r.eta;
    }
    return reports;
}

std::vector<WindowReport> detect_ordinary(const SymbolSequence& stream,
                                          const Eigen::VectorXd& reference_law,
                                          const Alphabet& alphabet,
                                          const WindowConfig& config,
                                          const SampleCache& cache) {
    return with_cache_thresholds(
        window_statistics(stream, reference_law, alphabet, config), cache, config.beta);
}

std::vector<WindowReport> detect_robust(const SymbolSequence& stream,
                                        const LawSchedule& schedule,
                                        const Alphabet& alphabet,
                                        const WindowConfig& config,
                                        const std::vector<SampleCache>& caches) {
    schedule.validate();
    const bool partitioned = schedule.partitioned();
    if (partitioned && caches.size() != schedule.laws.size())
        throw config_error("partitioned schedule needs one cache per law");
    if (!partitioned && caches.size() != 1)
        throw config_error("unpartitioned schedule needs exactly one (robust) cache");

    std::vector<DivergenceWorkspace> workspaces;
    workspaces.reserve(schedule.laws.size());
    for (const auto& entry : schedule.laws)
        workspaces.emplace_back((entry.law.array() > 0.0).all()
                                    ? entry.law
                                    : floored_law(entry.law, config.eps));

    std::vector<WindowReport> reports;
    for (const WindowSlice& w : sliding_windows(stream, config)) {
        if (w.skipped) {
            reports.push_back(skipped_report(w));
            continue;
        }
        const std::vector<int> active = schedule.applicable(w.start);
        if (active.empty())
            throw config_error("no law is valid at window start " + std::to_string(w.start));

        SymbolSequence slice;
        slice.symbols.assign(stream.symbols.begin() + static_cast<long>(w.begin_idx),
                             stream.symbols.begin() + static_cast<long>(w.end_idx));
        const EmpiricalLaw gamma = empirical_law(slice, alphabet, config.eps);

        WindowReport r;
        r.start = w.start;
        r.end = w.end;
        r.n = w.n();
        r.stat = std::numeric_limits<double>::infinity();
        for (int l : active) {
            const double d = relative_entropy(gamma.gamma, workspaces[l - 1]);
            if (d < r.stat) {
                r.stat = d;
                r.law_index = l;
            }
        }
        // Partitioned periods carry their own cache; otherwise the shared
        // robust cache covers every window.
        const SampleCache& cache = partitioned ? caches[static_cast<std::size_t>(
                                                     active.front() - 1)]
                                               : caches.front();
        r.eta = quantile_threshold(cache, r.n, config.beta).eta;
        r.flagged = r.stat > r.eta;
        reports.push_back(r);
    }
    return reports;
}

std::vector<std::size_t> sigma_refine(const std::vector<double>& candidate_values,
                                      const std::vector<double>& reference_values,
                                      double k_sigma) {
    if (reference_values.empty())
        throw input_error("sigma refinement needs nonempty reference values");
    const double n = static_cast<double>(reference_values.size());
    const double mean =
        std::accumulate(reference_values.begin(), reference_values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : reference_values) ss += (v - mean) * (v - mean);
    const double sd = n > 1.0 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    if (sd == 0.0)
        throw numerical_error("degenerate reference: zero standard deviation");
    const double cut = mean + k_sigma * sd;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < candidate_values.size(); ++i)
        if (candidate_values[i] > cut) kept.push_back(i);
    return kept;
}

}  // namespace markovht
