#include "markovht/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "markovht/errors.hpp"

namespace markovht {

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw input_error("cannot write '" + tmp + "'");
        out << content;
        if (!out) throw input_error("write failed for '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw input_error("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
    }
}

json parse_json(const std::string& path) {
    json j = json::parse(slurp(path), nullptr, false);
    if (j.is_discarded()) throw input_error("'" + path + "' is not valid JSON");
    return j;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_number(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw input_error("cannot parse number '" + s + "' in " + where);
    }
}

bool is_number(const std::string& s) {
    if (s.empty()) return false;
    std::size_t used = 0;
    try {
        (void)std::stod(s, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == s.size();
}

}  // namespace

TransitionModel load_model_json(const std::string& path) {
    const json j = parse_json(path);
    if (!j.contains("n_states") || !j.contains("q"))
        throw input_error("model file '" + path + "' needs fields n_states and q");
    const int n = j["n_states"].get<int>();
    if (n < 1) throw input_error("n_states must be positive in '" + path + "'");
    const auto& rows = j["q"];
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(n) * n)
        throw input_error("q must be a row-major array of n_states^2 numbers");
    Eigen::MatrixXd q(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            q(i, k) = rows[static_cast<std::size_t>(i) * n + k].get<double>();
    return make_model(q);
}

void save_model_json(const std::string& path, const TransitionModel& model) {
    json j;
    j["n_states"] = model.alphabet.n_states;
    std::vector<double> q;
    q.reserve(static_cast<std::size_t>(model.q.size()));
    for (Eigen::Index i = 0; i < model.q.rows(); ++i)
        for (Eigen::Index k = 0; k < model.q.cols(); ++k) q.push_back(model.q(i, k));
    j["q"] = q;
    write_atomic(path, j.dump(2) + "\n");
}

SymbolSequence load_stream_csv(const std::string& path) {
    std::istringstream in(slurp(path));
    std::string line;
    SymbolSequence z;
    bool first = true;
    int symbol_col = 0, time_col = -1;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (first) {
            first = false;
            if (!is_number(fields[0])) {  // header row
                symbol_col = -1;
                for (std::size_t c = 0; c < fields.size(); ++c) {
                    if (fields[c] == "symbol") symbol_col = static_cast<int>(c);
                    if (fields[c] == "timestamp") time_col = static_cast<int>(c);
                }
                if (symbol_col < 0)
                    throw input_error("stream '" + path + "' has no `symbol` column");
                continue;
            }
        }
        const std::string where = path + ":" + std::to_string(line_no);
        const double s = parse_number(fields[static_cast<std::size_t>(symbol_col)], where);
        if (s < 1 || s != std::floor(s))
            throw input_error("symbol must be a positive integer in " + where);
        z.symbols.push_back(static_cast<int>(s));
        if (time_col >= 0) {
            if (static_cast<std::size_t>(time_col) >= fields.size())
                throw input_error("missing timestamp in " + where);
            z.timestamps.push_back(
                parse_number(fields[static_cast<std::size_t>(time_col)], where));
        }
    }
    return z;
}

void save_stream_csv(const std::string& path, const SymbolSequence& stream) {
    std::ostringstream out;
    if (stream.timestamped()) {
        out << "symbol,timestamp\n";
        for (std::size_t i = 0; i < stream.size(); ++i)
            out << stream.symbols[i] << ',' << format_double(stream.timestamps[i]) << '\n';
    } else {
        out << "symbol\n";
        for (int s : stream.symbols) out << s << '\n';
    }
    write_atomic(path, out.str());
}

void save_threshold_json(const std::string& path, const ThresholdEstimate& estimate) {
    json j;
    j["method"] = to_string(estimate.method);
    j["n"] = estimate.n;
    j["beta"] = estimate.beta;
    j["eta"] = estimate.eta;
    j["T"] = estimate.T;
    j["seed"] = estimate.seed;
    j["truncation_m"] = estimate.truncation_m;
    j["repaired_eigencount"] = estimate.repaired_eigencount;
    write_atomic(path, j.dump(2) + "\n");
}

void save_report_csv(const std::string& path, const std::vector<WindowReport>& reports) {
    std::ostringstream out;
    out << "window_start,window_end,n,divergence,threshold,flagged,law_index\n";
    for (const auto& r : reports) {
        out << format_double(r.start) << ',' << format_double(r.end) << ',' << r.n << ',';
        if (!r.skipped) out << format_double(r.stat);
        out << ',';
        if (!r.skipped) out << format_double(r.eta);
        out << ',' << (r.flagged ? 1 : 0) << ',';
        if (r.law_index > 0) out << r.law_index;
        out << '\n';
    }
    write_atomic(path, out.str());
}

RecordTable load_records_csv(const std::string& path) {
    std::istringstream in(slurp(path));
    std::string line;
    if (!std::getline(in, line))
        throw input_error("records file '" + path + "' is empty");
    const auto header = split_csv_line(line);
    int time_col = -1;
    std::vector<std::string> feature_cols;
    std::vector<int> feature_idx;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "timestamp") {
            time_col = static_cast<int>(c);
        } else {
            feature_cols.push_back(header[c]);
            feature_idx.push_back(static_cast<int>(c));
        }
    }
    std::vector<std::vector<double>> values;
    std::vector<double> timestamps;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw input_error("row " + std::to_string(line_no) + " of '" + path +
                              "' has " + std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(header.size()));
        const std::string where = path + ":" + std::to_string(line_no);
        std::vector<double> row;
        row.reserve(feature_idx.size());
        for (int c : feature_idx)
            row.push_back(parse_number(fields[static_cast<std::size_t>(c)], where));
        values.push_back(std::move(row));
        if (time_col >= 0)
            timestamps.push_back(
                parse_number(fields[static_cast<std::size_t>(time_col)], where));
    }
    RecordTable table;
    table.columns = std::move(feature_cols);
    table.values.resize(static_cast<Eigen::Index>(values.size()),
                        static_cast<Eigen::Index>(table.columns.size()));
    for (std::size_t r = 0; r < values.size(); ++r)
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                values[r][c];
    table.timestamps = std::move(timestamps);
    return table;
}

namespace {

FeatureSchema schema_from_json(const json& j, const std::string& path) {
    FeatureSchema schema;
    if (j.contains("cluster")) {
        const auto& c = j["cluster"];
        if (!c.contains("columns") || !c.contains("k"))
            throw input_error("cluster block in '" + path + "' needs columns and k");
        for (const auto& name : c["columns"])
            schema.cluster_columns.push_back(name.get<std::string>());
        schema.cluster_k = c["k"].get<int>();
    }
    if (j.contains("scalars")) {
        for (const auto& s : j["scalars"]) {
            if (!s.contains("column") || !s.contains("levels"))
                throw input_error("scalar block in '" + path + "' needs column and levels");
            schema.scalars.push_back(
                FeatureSchema::Scalar{s["column"].get<std::string>(), s["levels"].get<int>()});
        }
    }
    schema.perturb_duplicate_timestamps =
        j.value("perturb_duplicate_timestamps", false);
    schema.validate();
    return schema;
}

json schema_to_json(const FeatureSchema& schema) {
    json j;
    if (!schema.cluster_columns.empty()) {
        j["cluster"] = {{"columns", schema.cluster_columns}, {"k", schema.cluster_k}};
    }
    json scalars = json::array();
    for (const auto& s : schema.scalars)
        scalars.push_back({{"column", s.name}, {"levels", s.levels}});
    j["scalars"] = scalars;
    j["perturb_duplicate_timestamps"] = schema.perturb_duplicate_timestamps;
    return j;
}

}  // namespace

FeatureSchema load_schema_json(const std::string& path) {
    return schema_from_json(parse_json(path), path);
}

void save_codebook_json(const std::string& path, const Codebook& codebook,
                        const FeatureSchema& schema) {
    json j;
    j["schema"] = schema_to_json(schema);
    json centers = json::array();
    for (const auto& c : codebook.centers)
        centers.push_back(std::vector<double>(c.data(), c.data() + c.size()));
    j["centers"] = centers;
    j["bin_edges"] = codebook.bin_edges;
    write_atomic(path, j.dump(2) + "\n");
}

Codebook load_codebook_json(const std::string& path, FeatureSchema* schema_out) {
    const json j = parse_json(path);
    if (!j.contains("schema") || !j.contains("centers") || !j.contains("bin_edges"))
        throw input_error("codebook '" + path + "' needs schema, centers, bin_edges");
    if (schema_out != nullptr) *schema_out = schema_from_json(j["schema"], path);
    Codebook book;
    for (const auto& c : j["centers"]) {
        const auto vals = c.get<std::vector<double>>();
        book.centers.push_back(
            Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())));
    }
    book.bin_edges = j["bin_edges"].get<std::vector<std::vector<double>>>();
    return book;
}

void save_accuracy_csv(const std::string& path, const std::vector<AccuracyRow>& rows) {
    std::ostringstream out;
    out << "N,n,method,d\n";
    for (const auto& r : rows)
        out << r.n_states << ',' << r.n << ',' << r.method << ',' << format_double(r.d)
            << '\n';
    write_atomic(path, out.str());
}

void save_roc_csv(const std::string& path, const std::vector<RocPoint>& points) {
    std::ostringstream out;
    out << "beta,method,fpr,tpr\n";
    for (const auto& p : points)
        out << format_double(p.beta) << ',' << p.method << ',' << format_double(p.fpr)
            << ',' << format_double(p.tpr) << '\n';
    write_atomic(path, out.str());
}

void save_threshold_curve_csv(const std::string& path,
                              const std::vector<ThresholdCurvePoint>& rows) {
    std::ostringstream out;
    out << "N,n,method,eta\n";
    for (const auto& r : rows)
        out << r.n_states << ',' << r.n << ',' << r.method << ',' << format_double(r.eta)
            << '\n';
    write_atomic(path, out.str());
}

}  // namespace markovht
