#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "markovht/errors.hpp"
#include "markovht/io.hpp"
#include "test_util.hpp"

using namespace markovht;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("markovht_io_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp_file(const std::string& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("model JSON round trips") {
    TempDir dir;
    const TransitionModel model = make_model(random_stochastic(3, 3));
    const std::string path = dir.file("model.json");
    save_model_json(path, model);
    const TransitionModel back = load_model_json(path);
    CHECK(back.alphabet.n_states == 3);
    CHECK((back.q - model.q).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((back.pi - model.pi).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("model loading validates the file") {
    TempDir dir;
    CHECK_THROWS_AS(load_model_json(dir.file("missing.json")), input_error);

    const std::string bad = dir.file("bad.json");
    std::ofstream(bad) << "{ not json";
    CHECK_THROWS_AS(load_model_json(bad), input_error);

    const std::string wrong = dir.file("wrong.json");
    std::ofstream(wrong) << R"({"n_states": 2, "q": [0.5, 0.5, 1.0]})";
    CHECK_THROWS_AS(load_model_json(wrong), input_error);

    const std::string nonstoch = dir.file("nonstoch.json");
    std::ofstream(nonstoch) << R"({"n_states": 2, "q": [0.5, 0.6, 0.5, 0.5]})";
    CHECK_THROWS_AS(load_model_json(nonstoch), input_error);
}

TEST_CASE("stream CSV round trips with and without timestamps") {
    TempDir dir;
    SymbolSequence z;
    z.symbols = {1, 4, 2, 2};
    const std::string plain = dir.file("plain.csv");
    save_stream_csv(plain, z);
    CHECK(load_stream_csv(plain).symbols == z.symbols);
    CHECK(!load_stream_csv(plain).timestamped());

    z.timestamps = {0.5, 1.25, 2.0, 7.75};
    const std::string timed = dir.file("timed.csv");
    save_stream_csv(timed, z);
    const SymbolSequence back = load_stream_csv(timed);
    CHECK(back.symbols == z.symbols);
    REQUIRE(back.timestamped());
    for (std::size_t i = 0; i < z.size(); ++i)
        CHECK(back.timestamps[i] == z.timestamps[i]);
}

TEST_CASE("headerless single-column streams are accepted") {
    TempDir dir;
    const std::string path = dir.file("legacy.csv");
    std::ofstream(path) << "3\n1\n2\n";
    CHECK(load_stream_csv(path).symbols == std::vector<int>{3, 1, 2});
}

TEST_CASE("stream loading rejects bad symbols") {
    TempDir dir;
    const std::string path = dir.file("zero.csv");
    std::ofstream(path) << "symbol\n0\n";
    CHECK_THROWS_AS(load_stream_csv(path), input_error);
    const std::string frac = dir.file("frac.csv");
    std::ofstream(frac) << "symbol\n1.5\n";
    CHECK_THROWS_AS(load_stream_csv(frac), input_error);
}

TEST_CASE("threshold JSON carries the documented fields") {
    TempDir dir;
    ThresholdEstimate est;
    est.eta = 0.125;
    est.method = ThresholdMethod::wc_gaussian;
    est.n = 50;
    est.beta = 0.001;
    est.T = 1000;
    est.seed = 42;
    est.truncation_m = 17;
    est.repaired_eigencount = 2;
    const std::string path = dir.file("t.json");
    save_threshold_json(path, est);
    const auto j = nlohmann::json::parse(slurp_file(path));
    CHECK(j["method"] == "wc-gaussian");
    CHECK(j["n"] == 50);
    CHECK(j["beta"] == doctest::Approx(0.001));
    CHECK(j["eta"] == doctest::Approx(0.125));
    CHECK(j["T"] == 1000);
    CHECK(j["seed"] == 42);
    CHECK(j["truncation_m"] == 17);
    CHECK(j["repaired_eigencount"] == 2);
}

TEST_CASE("report CSV has the documented columns and empty skipped cells") {
    TempDir dir;
    WindowReport tested;
    tested.start = 0.0;
    tested.end = 10.0;
    tested.n = 20;
    tested.stat = 0.25;
    tested.eta = 0.125;
    tested.flagged = true;
    tested.law_index = 2;
    WindowReport skipped;
    skipped.start = 10.0;
    skipped.end = 20.0;
    skipped.n = 1;
    skipped.skipped = true;
    const std::string path = dir.file("report.csv");
    save_report_csv(path, {tested, skipped});
    const std::string content = slurp_file(path);
    CHECK(content.find("window_start,window_end,n,divergence,threshold,flagged,law_index") ==
          0);
    CHECK(content.find("0,10,20,0.25,0.125,1,2") != std::string::npos);
    CHECK(content.find("10,20,1,,,0,") != std::string::npos);
}

TEST_CASE("record tables parse named columns and timestamps") {
    TempDir dir;
    const std::string path = dir.file("records.csv");
    std::ofstream(path) << "timestamp,size,duration\n1.0,100,2.5\n2.0,150,3.5\n";
    const RecordTable table = load_records_csv(path);
    REQUIRE(table.columns.size() == 2);
    CHECK(table.column_index("size") >= 0);
    CHECK(table.rows() == 2);
    CHECK(table.timestamps.size() == 2);
    CHECK(table.values(1, table.column_index("duration")) == doctest::Approx(3.5));

    const std::string ragged = dir.file("ragged.csv");
    std::ofstream(ragged) << "a,b\n1.0\n";
    CHECK_THROWS_AS(load_records_csv(ragged), input_error);
}

TEST_CASE("schema and codebook JSON round trip") {
    TempDir dir;
    const std::string schema_path = dir.file("schema.json");
    std::ofstream(schema_path) << R"({
      "cluster": {"columns": ["lat", "lon"], "k": 2},
      "scalars": [{"column": "delay", "levels": 2}, {"column": "size", "levels": 3}]
    })";
    const FeatureSchema schema = load_schema_json(schema_path);
    CHECK(schema.cluster_k == 2);
    CHECK(schema.alphabet_size() == 12);

    Codebook book;
    book.centers = {Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(3.0, 4.0)};
    book.bin_edges = {{0.5}, {0.25, 0.75}};
    const std::string book_path = dir.file("codebook.json");
    save_codebook_json(book_path, book, schema);
    FeatureSchema schema_back;
    const Codebook back = load_codebook_json(book_path, &schema_back);
    CHECK(schema_back.alphabet_size() == 12);
    REQUIRE(back.centers.size() == 2);
    CHECK((back.centers[1] - book.centers[1]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.bin_edges == book.bin_edges);
}

TEST_CASE("table writers emit the documented headers") {
    TempDir dir;
    save_accuracy_csv(dir.file("acc.csv"), {{4, 32, "wc", 0.001}});
    CHECK(slurp_file(dir.file("acc.csv")).find("N,n,method,d\n4,32,wc,0.001") == 0);
    save_roc_csv(dir.file("roc.csv"), {{0.01, 0.011, 0.97, "HTWC-1"}});
    CHECK(slurp_file(dir.file("roc.csv")).find("beta,method,fpr,tpr\n0.01,HTWC-1,0.011,0.97") ==
          0);
    save_threshold_curve_csv(dir.file("curve.csv"), {{4, 32, "oracle", 0.5}});
    CHECK(slurp_file(dir.file("curve.csv")).find("N,n,method,eta\n4,32,oracle,0.5") == 0);
}

TEST_CASE("failed writes leave no partial output behind") {
    TempDir dir;
    const std::string target = (dir.path / "nodir" / "out.csv").string();
    SymbolSequence z;
    z.symbols = {1};
    CHECK_THROWS_AS(save_stream_csv(target, z), input_error);
    CHECK(!fs::exists(target));
    CHECK(!fs::exists(target + ".tmp"));
}

}  // TEST_SUITE
