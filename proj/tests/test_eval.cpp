#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "markovht/errors.hpp"
#include "markovht/eval.hpp"
#include "markovht/markov.hpp"
#include "markovht/threshold.hpp"

using namespace markovht;

TEST_SUITE("eval") {

TEST_CASE("random transition models are valid, positive and reproducible") {
    for (int N : {1, 3, 6}) {
        const TransitionModel m = random_transition(N, 7);
        for (int i = 0; i < N; ++i)
            CHECK(m.q.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m.q.minCoeff() > 0.0);
        CHECK(m.pi.sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
    const TransitionModel a = random_transition(4, 11);
    const TransitionModel b = random_transition(4, 11);
    CHECK((a.q - b.q).cwiseAbs().maxCoeff() == 0.0);
    const TransitionModel c = random_transition(4, 12);
    CHECK((a.q - c.q).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("a batch of random models always admits a stationary law") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const TransitionModel m = random_transition(6, 100 + seed);
        CHECK((m.pi.transpose() * m.p - m.pi.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(m.pi.minCoeff() > 0.0);
    }
}

TEST_CASE("the oracle threshold shrinks for longer windows") {
    const TransitionModel m = random_transition(3, 21);
    const double beta = 0.01;
    const double at50 = oracle_threshold(m, 50, beta, 2000, 1);
    const double at200 = oracle_threshold(m, 200, beta, 2000, 2);
    const double at800 = oracle_threshold(m, 800, beta, 2000, 3);
    CHECK(at200 < at50);
    CHECK(at800 < at200);
}

TEST_CASE("for two states all estimators land close together") {
    const TransitionModel m = random_transition(2, 31);
    const long n = 50, T = 5000;
    const double beta = 0.001;
    const double star = oracle_threshold(m, n, beta, T, 4);
    const double wc = estimate_threshold_ordinary(m, n, beta, T, 5).eta;
    const double sv = sanov_threshold(n, beta).eta;
    CHECK(std::abs(wc - star) / star <= 0.3);
    CHECK(std::abs(sv - star) / star <= 0.3);
}

TEST_CASE("the oracle shares the quantile convention with the cache path") {
    SampleCache cache;
    cache.raw = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0};
    const double direct = empirical_upper_quantile(cache.raw, 0.25);
    CHECK(quantile_threshold(cache, 1, 0.25).eta == doctest::Approx(direct / 2.0));
}

TEST_CASE("mean squared error matches the hand formula") {
    CHECK(mean_squared_error({0.2}, {0.1}) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(mean_squared_error({0.3, 0.4}, {0.3, 0.4}) == 0.0);
    CHECK_THROWS_AS(mean_squared_error({0.1}, {0.1, 0.2}), input_error);
    CHECK_THROWS_AS(mean_squared_error({}, {}), input_error);
}

TEST_CASE("the sample-size grid follows the published rule") {
    const auto sizes4 = ExperimentGrid::sample_sizes(4);
    REQUIRE(!sizes4.empty());
    CHECK(sizes4.front() == 32);   // 2 * 16
    CHECK(sizes4.back() < 101);    // < 6 * 16 + 5
    for (std::size_t i = 1; i < sizes4.size(); ++i)
        CHECK(sizes4[i] - sizes4[i - 1] == 4);  // floor(0.2 * 16 + 1)

    const auto sizes6 = ExperimentGrid::sample_sizes(6);
    CHECK(sizes6.front() == 72);
    for (std::size_t i = 1; i < sizes6.size(); ++i)
        CHECK(sizes6[i] - sizes6[i - 1] == 8);  // floor(0.2 * 36 + 1)
}

TEST_CASE("a small accuracy run is deterministic and favors the wc estimator") {
    ExperimentGrid grid;
    grid.state_counts = {3};
    grid.beta = 0.01;
    grid.repetitions = 3;
    grid.paths = 400;
    grid.seed = 5;
    const auto rows = accuracy_metric({"sv", "wc"}, grid);
    const auto again = accuracy_metric({"sv", "wc"}, grid);
    REQUIRE(rows.size() == 2 * ExperimentGrid::sample_sizes(3).size());
    double sv_total = 0.0, wc_total = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].d == again[i].d);
        CHECK(rows[i].d >= 0.0);
        (rows[i].method == "sv" ? sv_total : wc_total) += rows[i].d;
    }
    CHECK(wc_total < sv_total);
    CHECK_THROWS_AS(accuracy_metric({"nope"}, grid), input_error);
}

TEST_CASE("an uninformative alternative gives matching rates") {
    const TransitionModel null_model = random_transition(3, 41);
    const auto points = roc_experiment(null_model, null_model, 60, 2000, {0.1},
                                       {"HTWC-1", "HTSV"}, 9);
    REQUIRE(points.size() == 2);
    for (const auto& p : points) {
        CHECK(std::abs(p.fpr - p.tpr) <= 0.04);
        // Rates are exact fractions over T paths.
        CHECK(p.fpr * 2000.0 == doctest::Approx(std::round(p.fpr * 2000.0)).epsilon(1e-9));
        CHECK(p.tpr * 2000.0 == doctest::Approx(std::round(p.tpr * 2000.0)).epsilon(1e-9));
    }
}

TEST_CASE("a separated alternative is detected at controlled false positives") {
    const TransitionModel null_model = random_transition(4, 51);
    const TransitionModel alt_model = random_transition(4, 52);
    const auto points =
        roc_experiment(null_model, alt_model, 50, 1000, {0.01}, {"HTWC-1"}, 10);
    REQUIRE(points.size() == 1);
    CHECK(points[0].fpr <= 0.05);
    CHECK(points[0].tpr >= 0.5);
    CHECK_THROWS_AS(roc_experiment(null_model, alt_model, 50, 100, {0.01}, {"bad"}, 1),
                    input_error);
}

TEST_CASE("the default beta set is the documented one") {
    const auto betas = default_roc_betas();
    REQUIRE(betas.size() == 20);
    CHECK(betas.front() == doctest::Approx(0.001));
    CHECK(betas[1] == doctest::Approx(0.01));
    CHECK(betas.back() == doctest::Approx(0.19));
}

TEST_CASE("threshold curves cover every estimator on the grid") {
    const auto points = threshold_curve(2, 0.01, 300, 3);
    const auto sizes = ExperimentGrid::sample_sizes(2);
    REQUIRE(points.size() == 4 * sizes.size());
    for (const auto& p : points) {
        CHECK(p.eta >= 0.0);
        CHECK(p.n_states == 2);
    }
    CHECK(std::count_if(points.begin(), points.end(),
                        [](const auto& p) { return p.method == "oracle"; }) ==
          static_cast<long>(sizes.size()));
}

}  // TEST_SUITE
