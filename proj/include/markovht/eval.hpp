#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "markovht/markov.hpp"
#include "markovht/threshold.hpp"

namespace markovht {

/// Experiment layout for the accuracy study: state counts, target rate,
/// repetitions per cell and Monte-Carlo path count, all seeded.
struct ExperimentGrid {
    std::vector<int> state_counts;  // N values
    double beta = 1e-3;
    int repetitions = 50;  // K
    long paths = 1000;     // T
    std::uint64_t seed = 1;

    /// Sample sizes for one N: n = 2N^2 + i * floor(0.2 N^2 + 1) while n < 6N^2 + 5.
    static std::vector<long> sample_sizes(int n_states);

    void validate() const;
};

struct RocPoint {
    double beta = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
    std::string method;  // HTWC-1 | HTWC-2 | HTSV
};

struct AccuracyRow {
    int n_states = 0;
    long n = 0;
    std::string method;  // sv | wc | wc-chi2
    double d = 0.0;      // mean squared estimation error vs the oracle
};

/// Random row-stochastic matrix with strictly positive entries: symmetric
/// Dirichlet(1) rows, floored at min_entry and renormalized.
TransitionModel random_transition(int n_states, std::uint64_t seed,
                                  double min_entry = 1e-3);

/// Ground-truth proxy: the (1-beta) empirical quantile of the divergence over
/// T freshly simulated length-n paths. Shares the order-statistic convention
/// with quantile_threshold.
double oracle_threshold(const TransitionModel& model, long n, double beta, long T,
                        std::uint64_t seed);

/// Mean squared difference between two equally long estimate lists.
double mean_squared_error(const std::vector<double>& estimates,
                          const std::vector<double>& oracle);

/// Accuracy study over the grid: per (N, n, method), the average over K
/// random models of (estimate - oracle)^2. The wc estimates follow the
/// estimated-reference protocol (past path of 1000 N^2 symbols).
std::vector<AccuracyRow> accuracy_metric(const std::vector<std::string>& methods,
                                         const ExperimentGrid& grid);

/// ROC harness: T negative paths from the null model and T positive paths
/// from the alternative; thresholds use the exact null law. Returns one point
/// per (beta, method).
std::vector<RocPoint> roc_experiment(const TransitionModel& null_model,
                                     const TransitionModel& alt_model, long n, long T,
                                     const std::vector<double>& betas,
                                     const std::vector<std::string>& methods,
                                     std::uint64_t seed);

/// The default target-rate set for ROC runs: {0.001} followed by 0.01..0.19.
std::vector<double> default_roc_betas();

struct ThresholdCurvePoint {
    int n_states = 0;
    long n = 0;
    std::string method;  // oracle | wc | wc-chi2 | sv
    double eta = 0.0;
};

/// Threshold-versus-sample-size curves for one random model: the oracle and
/// every estimator evaluated on the standard n grid for this N. The wc
/// estimators follow the estimated-reference protocol.
std::vector<ThresholdCurvePoint> threshold_curve(int n_states, double beta, long T,
                                                 std::uint64_t seed);

}  // namespace markovht
