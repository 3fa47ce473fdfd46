#pragma once

#include <string>
#include <vector>

#include "markovht/detector.hpp"
#include "markovht/eval.hpp"
#include "markovht/markov.hpp"
#include "markovht/quantizer.hpp"
#include "markovht/threshold.hpp"

namespace markovht {

// All writers are atomic: content goes to a temp file first and is renamed
// into place, so a failed run never leaves a partial output behind.

/// Model JSON: {"n_states": N, "q": [row-major N*N probabilities]}.
TransitionModel load_model_json(const std::string& path);
void save_model_json(const std::string& path, const TransitionModel& model);

/// Symbol stream CSV: header `symbol` or `symbol,timestamp`, one integer
/// symbol (and optional real timestamp, seconds) per row. Headerless
/// single-column files are accepted too.
SymbolSequence load_stream_csv(const std::string& path);
void save_stream_csv(const std::string& path, const SymbolSequence& stream);

/// Threshold report JSON:
/// {method, n, beta, eta, T, seed, truncation_m, repaired_eigencount}.
void save_threshold_json(const std::string& path, const ThresholdEstimate& estimate);

/// Window report CSV with columns
/// window_start,window_end,n,divergence,threshold,flagged,law_index.
/// Skipped windows keep empty divergence/threshold cells.
void save_report_csv(const std::string& path, const std::vector<WindowReport>& reports);

/// Feature records CSV: header row with a `timestamp` column (optional) plus
/// named numeric feature columns.
RecordTable load_records_csv(const std::string& path);

/// Quantizer schema JSON:
/// {"cluster": {"columns": [...], "k": 2}?, "scalars": [{"column": ..,
///  "levels": ..}...], "perturb_duplicate_timestamps": false?}.
FeatureSchema load_schema_json(const std::string& path);

/// Codebook JSON: schema echo plus fitted centers and bin edges.
void save_codebook_json(const std::string& path, const Codebook& codebook,
                        const FeatureSchema& schema);
Codebook load_codebook_json(const std::string& path, FeatureSchema* schema_out = nullptr);

/// Accuracy table CSV: N,n,method,d.
void save_accuracy_csv(const std::string& path, const std::vector<AccuracyRow>& rows);

/// ROC table CSV: beta,method,fpr,tpr.
void save_roc_csv(const std::string& path, const std::vector<RocPoint>& points);

/// Threshold-vs-n table CSV: N,n,method,eta.
void save_threshold_curve_csv(const std::string& path,
                              const std::vector<ThresholdCurvePoint>& rows);

}  // namespace markovht
