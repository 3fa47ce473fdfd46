#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "markovht/markov.hpp"

namespace markovht {

/// Named numeric columns plus an optional timestamp per row.
struct RecordTable {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;          // rows x columns
    std::vector<double> timestamps;  // empty, or one per row

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    int column_index(const std::string& name) const;
};

/// How raw feature records map onto the finite alphabet: one optional
/// clustered (possibly multi-column) feature with k centers, plus scalar
/// features binned into quantile levels. The alphabet has k * prod(levels)
/// states, mixed-radix coded.
struct FeatureSchema {
    struct Scalar {
        std::string name;
        int levels = 1;
    };
    std::vector<std::string> cluster_columns;  // empty = no clustered feature
    int cluster_k = 1;
    std::vector<Scalar> scalars;
    bool perturb_duplicate_timestamps = false;

    int alphabet_size() const;
    void validate() const;
};

/// Frozen quantization: k-means centers for the clustered feature and sorted
/// quantile cut points per scalar feature. Fit once on reference data, then
/// reused verbatim on test data.
struct Codebook {
    std::vector<Eigen::VectorXd> centers;
    std::vector<std::vector<double>> bin_edges;  // one list per scalar feature
};

using RecordMetric =
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

double euclidean_metric(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// k-means (k-means++ seeding, Lloyd iterations) on the clustered feature
/// under the supplied metric, and per-feature quantile bin edges at i/levels.
/// Deterministic for a fixed seed.
Codebook fit_codebook(const RecordTable& records, const FeatureSchema& schema,
                      const RecordMetric& metric = euclidean_metric,
                      std::uint64_t seed = 0);

/// Encode one record as a 1-based state in {1..N}; total (out-of-range
/// values clamp to the extreme bins, edge ties go to the lower bin).
int encode(const RecordTable& records, std::size_t row, const Codebook& codebook,
           const FeatureSchema& schema, const RecordMetric& metric = euclidean_metric);

/// Encode every row; timestamps (if present) are carried through, optionally
/// nudging exact duplicates apart by schema flag.
SymbolSequence encode_all(const RecordTable& records, const Codebook& codebook,
                          const FeatureSchema& schema,
                          const RecordMetric& metric = euclidean_metric);

}  // namespace markovht
