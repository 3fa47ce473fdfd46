#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "markovht/detector.hpp"
#include "markovht/errors.hpp"
#include "markovht/eval.hpp"
#include "markovht/io.hpp"
#include "markovht/log.hpp"
#include "markovht/markov.hpp"
#include "markovht/quantizer.hpp"
#include "markovht/rng.hpp"
#include "markovht/threshold.hpp"

#include <json.hpp>

namespace {

using namespace markovht;

bool is_json_file(const std::string& path) {
    return std::filesystem::path(path).extension() == ".json";
}

// Alphabet for a raw symbol stream: smallest N with N^2 covering every symbol,
// unless the caller pinned N explicitly.
Alphabet stream_alphabet(const SymbolSequence& z, int states_flag) {
    if (states_flag > 0) return Alphabet(states_flag);
    int max_symbol = 1;
    for (int s : z.symbols) max_symbol = std::max(max_symbol, s);
    int n = 1;
    while (n * n < max_symbol) ++n;
    log_info("inferred N=%d from max symbol %d; pass --states to override", n, max_symbol);
    return Alphabet(n);
}

struct Reference {
    ReferenceContext context;
    Eigen::VectorXd law;  // law the detector measures against
};

Reference load_reference(const std::string& path, int states_flag, double eps) {
    Reference ref;
    if (is_json_file(path)) {
        const TransitionModel model = load_model_json(path);
        ref.context = prepare_reference(model, eps);
    } else {
        const SymbolSequence z = load_stream_csv(path);
        ref.context = prepare_reference(z, stream_alphabet(z, states_flag), eps);
    }
    ref.law = ref.context.law;
    return ref;
}

int cmd_simulate(const std::string& model_path, long n, std::uint64_t seed, double rate,
                 const std::string& out) {
    const TransitionModel model = load_model_json(model_path);
    SymbolSequence z = simulate_path(model, n, seed);
    if (rate > 0.0) {
        z.timestamps.resize(z.symbols.size());
        for (std::size_t i = 0; i < z.timestamps.size(); ++i)
            z.timestamps[i] = static_cast<double>(i) / rate;
    }
    save_stream_csv(out, z);
    log_info("wrote %zu symbols to %s", z.size(), out.c_str());
    return 0;
}

int cmd_threshold(const std::vector<std::string>& references, long n, double beta,
                  const std::string& method, long T, std::uint64_t seed, double eps,
                  int states_flag, const std::string& out) {
    ThresholdEstimate est;
    if (method == "sv") {
        est = sanov_threshold(n, beta);
    } else if (method == "wc" || method == "wc-chi2") {
        if (references.size() != 1)
            throw input_error("method " + method + " takes exactly one --reference");
        const Reference ref = load_reference(references.front(), states_flag, eps);
        const WcBranch branch = method == "wc" ? WcBranch::gaussian : WcBranch::chi2;
        const SampleCache cache = ordinary_cache(ref.context, branch, T, seed);
        est = quantile_threshold(cache, n, beta);
        est.truncation_m = ref.context.cov.truncation_m;
        est.repaired_eigencount = static_cast<int>(ref.context.cov.repair_log.size());
    } else if (method == "wc-robust") {
        if (references.empty()) throw input_error("wc-robust needs at least one --reference");
        std::vector<ReferenceContext> contexts;
        for (const auto& path : references)
            contexts.push_back(load_reference(path, states_flag, eps).context);
        est = estimate_threshold_robust(contexts, n, beta, T, seed);
    } else {
        throw input_error("unknown method '" + method + "' (sv|wc|wc-chi2|wc-robust)");
    }
    save_threshold_json(out, est);
    log_info("eta = %.10g (%s)", est.eta, to_string(est.method).c_str());
    return 0;
}

LawSchedule load_schedule(const std::string& path, int states_flag, double eps,
                          std::vector<ReferenceContext>* contexts) {
    const nlohmann::json j = [&] {
        std::ifstream in(path);
        if (!in) throw input_error("cannot open schedule '" + path + "'");
        nlohmann::json parsed;
        in >> parsed;
        return parsed;
    }();
    if (!j.contains("laws") || !j["laws"].is_array() || j["laws"].empty())
        throw input_error("schedule '" + path + "' needs a nonempty `laws` array");
    LawSchedule schedule;
    schedule.period_seconds = j.value("period_seconds", 86400.0);
    for (const auto& entry : j["laws"]) {
        if (!entry.contains("reference"))
            throw input_error("every schedule law needs a `reference` file");
        const Reference ref =
            load_reference(entry["reference"].get<std::string>(), states_flag, eps);
        LawSchedule::Entry e;
        e.law = ref.law;
        e.start = entry.value("start", 0.0);
        e.end = entry.value("end", 0.0);
        schedule.laws.push_back(std::move(e));
        contexts->push_back(ref.context);
    }
    return schedule;
}

int cmd_detect(const std::string& stream_path, const std::vector<std::string>& references,
               const std::string& schedule_path, double w_s, double w_d, double beta,
               int min_samples, const std::string& method, long T, std::uint64_t seed,
               double eps, int states_flag, const std::string& out) {
    const SymbolSequence stream = load_stream_csv(stream_path);
    WindowConfig config;
    config.w_s = w_s;
    config.w_d = w_d;
    config.beta = beta;
    config.eps = eps;

    if (stream.empty()) {
        save_report_csv(out, {});
        log_info("empty stream; wrote empty report to %s", out.c_str());
        return 0;
    }

    std::vector<WindowReport> reports;
    if (!schedule_path.empty()) {
        std::vector<ReferenceContext> contexts;
        LawSchedule schedule = load_schedule(schedule_path, states_flag, eps, &contexts);
        schedule.validate();
        const Alphabet alphabet(static_cast<int>(
            std::lround(std::sqrt(static_cast<double>(schedule.laws.front().law.size())))));
        config.min_samples =
            min_samples > 0 ? min_samples : std::max(2, alphabet.pair_size() / 4);
        std::vector<SampleCache> caches;
        if (schedule.partitioned()) {
            for (std::size_t l = 0; l < contexts.size(); ++l)
                caches.push_back(ordinary_cache(contexts[l], WcBranch::gaussian, T,
                                                derive_seed(seed, 0x706572ULL, l)));
        } else {
            caches.push_back(robust_cache(contexts, T, seed));
        }
        reports = detect_robust(stream, schedule, alphabet, config, caches);
    } else if (references.size() > 1) {
        std::vector<ReferenceContext> contexts;
        LawSchedule schedule;
        for (const auto& path : references) {
            const Reference ref = load_reference(path, states_flag, eps);
            schedule.laws.push_back(LawSchedule::Entry{ref.law, 0.0, 0.0});
            contexts.push_back(ref.context);
        }
        const Alphabet alphabet(static_cast<int>(std::lround(
            std::sqrt(static_cast<double>(schedule.laws.front().law.size())))));
        config.min_samples =
            min_samples > 0 ? min_samples : std::max(2, alphabet.pair_size() / 4);
        std::vector<SampleCache> caches{robust_cache(contexts, T, seed)};
        reports = detect_robust(stream, schedule, alphabet, config, caches);
    } else {
        if (references.empty()) throw input_error("detect needs --reference or --schedule");
        const Reference ref = load_reference(references.front(), states_flag, eps);
        const Alphabet alphabet = ref.context.model.alphabet;
        config.min_samples =
            min_samples > 0 ? min_samples : std::max(2, alphabet.pair_size() / 4);
        auto stats = window_statistics(stream, ref.law, alphabet, config);
        if (method == "sv") {
            reports = with_sanov_thresholds(std::move(stats), beta);
        } else if (method == "wc") {
            const SampleCache cache = ordinary_cache(ref.context, WcBranch::gaussian, T, seed);
            reports = with_cache_thresholds(std::move(stats), cache, beta);
        } else {
            throw input_error("detect supports --method wc or sv");
        }
    }
    save_report_csv(out, reports);
    long flagged = 0, skipped = 0;
    for (const auto& r : reports) {
        flagged += r.flagged ? 1 : 0;
        skipped += r.skipped ? 1 : 0;
    }
    log_info("%zu windows (%ld flagged, %ld skipped) -> %s", reports.size(), flagged,
             skipped, out.c_str());
    return 0;
}

int cmd_quantize(const std::string& records_path, const std::string& schema_path,
                 const std::string& codebook_in, std::uint64_t seed,
                 const std::string& out, const std::string& codebook_out) {
    const RecordTable records = load_records_csv(records_path);
    FeatureSchema schema;
    Codebook book;
    if (!codebook_in.empty()) {
        book = load_codebook_json(codebook_in, &schema);
    } else {
        schema = load_schema_json(schema_path);
        book = fit_codebook(records, schema, euclidean_metric, seed);
    }
    const SymbolSequence z = encode_all(records, book, schema);
    save_stream_csv(out, z);
    if (!codebook_out.empty()) save_codebook_json(codebook_out, book, schema);
    log_info("encoded %zu records into alphabet of %d states", records.rows(),
             schema.alphabet_size());
    return 0;
}

int cmd_roc(int n_states, long n, long T, std::uint64_t seed, const std::string& betas_flag,
            const std::string& model_path, const std::string& alt_path,
            const std::string& out) {
    const TransitionModel null_model = model_path.empty()
                                           ? random_transition(n_states, derive_seed(seed, 1))
                                           : load_model_json(model_path);
    const TransitionModel alt_model = alt_path.empty()
                                          ? random_transition(n_states, derive_seed(seed, 2))
                                          : load_model_json(alt_path);
    std::vector<double> betas = default_roc_betas();
    if (!betas_flag.empty()) {
        betas.clear();
        std::stringstream ss(betas_flag);
        std::string tok;
        while (std::getline(ss, tok, ',')) betas.push_back(std::stod(tok));
    }
    const auto points = roc_experiment(null_model, alt_model, n, T, betas,
                                       {"HTWC-1", "HTWC-2", "HTSV"}, seed);
    save_roc_csv(out, points);
    return 0;
}

int cmd_accuracy(const std::string& n_list, double beta, int K, long T, std::uint64_t seed,
                 const std::string& methods_flag, const std::string& out) {
    ExperimentGrid grid;
    grid.state_counts.clear();
    {
        std::stringstream ss(n_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) grid.state_counts.push_back(std::stoi(tok));
    }
    grid.beta = beta;
    grid.repetitions = K;
    grid.paths = T;
    grid.seed = seed;
    std::vector<std::string> methods;
    {
        std::stringstream ss(methods_flag);
        std::string tok;
        while (std::getline(ss, tok, ',')) methods.push_back(tok);
    }
    save_accuracy_csv(out, accuracy_metric(methods, grid));
    return 0;
}

int cmd_curve(int n_states, double beta, long T, std::uint64_t seed, const std::string& out) {
    save_threshold_curve_csv(out, threshold_curve(n_states, beta, T, seed));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Composite-hypothesis anomaly detection for finite-state Markov models"};
    app.require_subcommand(1);

    // simulate
    std::string model_path, out_path;
    long sim_n = 0;
    std::uint64_t seed = 1;
    double rate = 0.0;
    auto* simulate = app.add_subcommand("simulate", "Sample a symbol stream from a model");
    simulate->add_option("--model", model_path, "model JSON")->required();
    simulate->add_option("--n", sim_n, "number of symbols")->required()
        ->check(CLI::PositiveNumber);
    simulate->add_option("--seed", seed, "RNG seed");
    simulate->add_option("--rate", rate, "events per second; adds a timestamp column");
    simulate->add_option("--out", out_path, "output stream CSV")->required();

    // threshold
    std::vector<std::string> references;
    long n = 0, T = 1000;
    double beta = 1e-3, eps = kDefaultFloorEps;
    std::string method = "wc";
    int states_flag = 0;
    auto* threshold = app.add_subcommand("threshold", "Estimate a detection threshold");
    threshold->add_option("--reference", references,
                          "model JSON or stream CSV (repeat for wc-robust)")
        ->required();
    threshold->add_option("--n", n, "window sample size")->required()
        ->check(CLI::PositiveNumber);
    threshold->add_option("--beta", beta, "target false positive rate");
    threshold->add_option("--method", method, "sv|wc|wc-chi2|wc-robust");
    threshold->add_option("--T", T, "Monte-Carlo samples");
    threshold->add_option("--seed", seed, "RNG seed");
    threshold->add_option("--eps", eps, "law floor");
    threshold->add_option("--states", states_flag, "original-chain N for CSV references");
    threshold->add_option("--out", out_path, "output threshold JSON")->required();

    // detect
    std::string stream_path, schedule_path;
    double w_s = 0.0, w_d = 0.0;
    int min_samples = 0;
    auto* detect = app.add_subcommand("detect", "Sliding-window detection over a stream");
    detect->add_option("--stream", stream_path, "timestamped stream CSV")->required();
    detect->add_option("--reference", references, "model JSON or stream CSV (repeatable)");
    detect->add_option("--schedule", schedule_path, "law schedule JSON");
    detect->add_option("--ws", w_s, "window size, seconds")->required();
    detect->add_option("--wd", w_d, "window stride, seconds")->required();
    detect->add_option("--beta", beta, "target false positive rate");
    detect->add_option("--min-samples", min_samples, "skip windows below this count");
    detect->add_option("--method", method, "wc|sv (single-reference only)");
    detect->add_option("--T", T, "Monte-Carlo samples");
    detect->add_option("--seed", seed, "RNG seed");
    detect->add_option("--eps", eps, "law floor");
    detect->add_option("--states", states_flag, "original-chain N for CSV references");
    detect->add_option("--out", out_path, "output report CSV")->required();

    // quantize
    std::string records_path, schema_path, codebook_in, codebook_out;
    auto* quantize = app.add_subcommand("quantize", "Quantize feature records into symbols");
    quantize->add_option("--records", records_path, "records CSV")->required();
    quantize->add_option("--schema", schema_path, "schema JSON");
    quantize->add_option("--codebook-in", codebook_in, "reuse a fitted codebook");
    quantize->add_option("--seed", seed, "RNG seed");
    quantize->add_option("--out", out_path, "output symbol CSV")->required();
    quantize->add_option("--codebook", codebook_out, "output codebook JSON");

    // roc
    int roc_states = 4;
    std::string betas_flag, alt_path;
    auto* roc = app.add_subcommand("roc", "ROC table for the three threshold estimators");
    roc->add_option("--N", roc_states, "original-chain states");
    roc->add_option("--n", n, "path length")->required()->check(CLI::PositiveNumber);
    roc->add_option("--T", T, "paths per class");
    roc->add_option("--seed", seed, "RNG seed");
    roc->add_option("--betas", betas_flag, "comma-separated target rates");
    roc->add_option("--model", model_path, "null model JSON (random if omitted)");
    roc->add_option("--alt-model", alt_path, "alternative model JSON (random if omitted)");
    roc->add_option("--out", out_path, "output CSV")->required();

    // accuracy
    std::string grid_states = "4", methods_flag = "sv,wc";
    int reps = 50;
    auto* accuracy =
        app.add_subcommand("accuracy", "Mean squared threshold-estimation error table");
    accuracy->add_option("--N", grid_states, "comma-separated state counts");
    accuracy->add_option("--beta", beta, "target false positive rate");
    accuracy->add_option("--K", reps, "repetitions per cell");
    accuracy->add_option("--T", T, "Monte-Carlo paths/samples");
    accuracy->add_option("--seed", seed, "RNG seed");
    accuracy->add_option("--methods", methods_flag, "subset of sv,wc,wc-chi2");
    accuracy->add_option("--out", out_path, "output CSV")->required();

    // curve
    int curve_states = 4;
    auto* curve = app.add_subcommand("curve", "Threshold-versus-n table for one model");
    curve->add_option("--N", curve_states, "original-chain states");
    curve->add_option("--beta", beta, "target false positive rate");
    curve->add_option("--T", T, "Monte-Carlo samples");
    curve->add_option("--seed", seed, "RNG seed");
    curve->add_option("--out", out_path, "output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(model_path, sim_n, seed, rate, out_path);
        if (threshold->parsed())
            return cmd_threshold(references, n, beta, method, T, seed, eps, states_flag,
                                 out_path);
        if (detect->parsed())
            return cmd_detect(stream_path, references, schedule_path, w_s, w_d, beta,
                              min_samples, method, T, seed, eps, states_flag, out_path);
        if (quantize->parsed())
            return cmd_quantize(records_path, schema_path, codebook_in, seed, out_path,
                                codebook_out);
        if (roc->parsed())
            return cmd_roc(roc_states, n, T, seed, betas_flag, model_path, alt_path, out_path);
        if (accuracy->parsed())
            return cmd_accuracy(grid_states, beta, reps, T, seed, methods_flag, out_path);
        if (curve->parsed()) return cmd_curve(curve_states, beta, T, seed, out_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
