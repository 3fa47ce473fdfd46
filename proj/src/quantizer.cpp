#include "markovht/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "markovht/errors.hpp"
#include "markovht/log.hpp"
#include "markovht/rng.hpp"

namespace markovht {

int RecordTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    throw input_error("unknown feature column '" + name + "'");
}

int FeatureSchema::alphabet_size() const {
    int n = cluster_columns.empty() ? 1 : cluster_k;
    for (const auto& s : scalars) n *= s.levels;
    return n;
}

void FeatureSchema::validate() const {
    if (!cluster_columns.empty() && cluster_k < 1)
        throw input_error("cluster count k must be at least 1");
    for (const auto& s : scalars)
        if (s.levels < 1)
            throw input_error("quantization level for '" + s.name + "' must be >= 1");
    if (cluster_columns.empty() && scalars.empty())
        throw input_error("schema names no features");
}

double euclidean_metric(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm();
}

namespace {

// Type-7 empirical quantile (linear interpolation between order statistics).
double quantile_type7(const std::vector<double>& sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - std::floor(h);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<Eigen::VectorXd> cluster_points(const RecordTable& records,
                                            const FeatureSchema& schema) {
    std::vector<int> cols;
    for (const auto& name : schema.cluster_columns)
        cols.push_back(records.column_index(name));
    std::vector<Eigen::VectorXd> pts(records.rows());
    for (std::size_t r = 0; r < records.rows(); ++r) {
        Eigen::VectorXd v(cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c)
            v[static_cast<Eigen::Index>(c)] = records.values(static_cast<Eigen::Index>(r), cols[c]);
        pts[r] = std::move(v);
    }
    return pts;
}

std::vector<Eigen::VectorXd> kmeans(const std::vector<Eigen::VectorXd>& pts, int k,
                                    const RecordMetric& metric, std::uint64_t seed) {
    if (static_cast<int>(pts.size()) < k)
        throw input_error("k-means needs at least k records (" + std::to_string(pts.size()) +
                          " < " + std::to_string(k) + ")");
    auto rng = make_rng(derive_seed(seed, 0x6b6d65616e73ULL));  // "kmeans" tag
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    // k-means++ seeding.
    std::vector<Eigen::VectorXd> centers;
    centers.push_back(pts[std::min(
        pts.size() - 1,
        static_cast<std::size_t>(u01(rng) * static_cast<double>(pts.size())))]);
    std::vector<double> d2(pts.size());
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) best = std::min(best, metric(pts[i], c));
            d2[i] = best * best;
            total += d2[i];
        }
        if (total <= 0.0) {
            // All remaining mass sits on existing centers; duplicate points.
            centers.push_back(pts[centers.size() % pts.size()]);
            continue;
        }
        double pick = u01(rng) * total;
        std::size_t chosen = pts.size() - 1;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            pick -= d2[i];
            if (pick <= 0.0) {
                chosen = i;
                break;
            }
        }
        centers.push_back(pts[chosen]);
    }

    // Lloyd iterations; centers are coordinate means of their members.
    std::vector<int> assign(pts.size(), -1);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = metric(pts[i], centers[static_cast<std::size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        for (int c = 0; c < k; ++c) {
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(pts.front().size());
            long count = 0;
            for (std::size_t i = 0; i < pts.size(); ++i)
                if (assign[i] == c) {
                    sum += pts[i];
                    ++count;
                }
            if (count > 0) {
                centers[static_cast<std::size_t>(c)] = sum / static_cast<double>(count);
            } else {
                // Re-seed an empty cluster at the point farthest from its center.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    const double d =
                        metric(pts[i], centers[static_cast<std::size_t>(assign[i])]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                centers[static_cast<std::size_t>(c)] = pts[far];
            }
        }
    }
    return centers;
}

}  // namespace

Codebook fit_codebook(const RecordTable& records, const FeatureSchema& schema,
                      const RecordMetric& metric, std::uint64_t seed) {
    schema.validate();
    if (records.rows() == 0) throw input_error("cannot fit a codebook on zero records");

    Codebook book;
    if (!schema.cluster_columns.empty())
        book.centers = kmeans(cluster_points(records, schema), schema.cluster_k, metric, seed);

    for (const auto& scalar : schema.scalars) {
        const int col = records.column_index(scalar.name);
        std::vector<double> sorted(records.rows());
        for (std::size_t r = 0; r < records.rows(); ++r)
            sorted[r] = records.values(static_cast<Eigen::Index>(r), col);
        std::sort(sorted.begin(), sorted.end());

        std::vector<double> edges;
        for (int i = 1; i < scalar.levels; ++i)
            edges.push_back(
                quantile_type7(sorted, static_cast<double>(i) / scalar.levels));
        // Strictly increasing edges only; ties collapse bins.
        std::vector<double> unique_edges;
        for (double e : edges)
            if (unique_edges.empty() || e > unique_edges.back()) unique_edges.push_back(e);
        if (unique_edges.size() + 1 < static_cast<std::size_t>(scalar.levels))
            log_warn("feature '%s' is (nearly) constant: %zu of %d bins are reachable",
                     scalar.name.c_str(), unique_edges.size() + 1, scalar.levels);
        book.bin_edges.push_back(std::move(unique_edges));
    }
    return book;
}

int encode(const RecordTable& records, std::size_t row, const Codebook& codebook,
           const FeatureSchema& schema, const RecordMetric& metric) {
    int state = 0;

    if (!schema.cluster_columns.empty()) {
        Eigen::VectorXd v(schema.cluster_columns.size());
        for (std::size_t c = 0; c < schema.cluster_columns.size(); ++c)
            v[static_cast<Eigen::Index>(c)] = records.values(
                static_cast<Eigen::Index>(row), records.column_index(schema.cluster_columns[c]));
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < codebook.centers.size(); ++c) {
            const double d = metric(v, codebook.centers[c]);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        state = best;
    }

    for (std::size_t f = 0; f < schema.scalars.size(); ++f) {
        const double value =
            records.values(static_cast<Eigen::Index>(row),
                           records.column_index(schema.scalars[f].name));
        const auto& edges = codebook.bin_edges[f];
        // Ties at an edge stay in the lower bin: count edges strictly below.
        int bin = static_cast<int>(std::lower_bound(edges.begin(), edges.end(), value) -
                                   edges.begin());
        state = state * schema.scalars[f].levels + bin;
    }
    return state + 1;
}

SymbolSequence encode_all(const RecordTable& records, const Codebook& codebook,
                          const FeatureSchema& schema, const RecordMetric& metric) {
    SymbolSequence z;
    z.symbols.reserve(records.rows());
    for (std::size_t r = 0; r < records.rows(); ++r)
        z.symbols.push_back(encode(records, r, codebook, schema, metric));
    if (!records.timestamps.empty()) {
        z.timestamps = records.timestamps;
        if (schema.perturb_duplicate_timestamps) {
            for (std::size_t i = 1; i < z.timestamps.size(); ++i)
                if (z.timestamps[i] <= z.timestamps[i - 1])
                    z.timestamps[i] = std::nextafter(
                        z.timestamps[i - 1], std::numeric_limits<double>::infinity());
        }
    }
    return z;
}

}  // namespace markovht
