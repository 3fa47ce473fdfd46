#include <doctest.h>

#include <Eigen/Dense>
#include <vector>

#include "markovht/errors.hpp"
#include "markovht/markov.hpp"
#include "test_util.hpp"

using namespace markovht;

namespace {

// The worked 3x3 example chain used throughout the suites.
Eigen::MatrixXd example_q3() {
    Eigen::MatrixXd q(3, 3);
    q << 0.1, 0.2, 0.7,
         0.0, 0.2, 0.8,
         0.6, 0.15, 0.25;
    return q;
}

// Its exact pair-chain stationary law: row masses (32, 17, 48)/97 times the
// corresponding Q row (hand algebra, cross-checked by the dense oracle).
Eigen::VectorXd example_pi3() {
    Eigen::VectorXd pi(9);
    pi << 3.2, 6.4, 22.4, 0.0, 3.4, 13.6, 28.8, 7.2, 12.0;
    return pi / 97.0;
}

}  // namespace

TEST_SUITE("markov") {

TEST_CASE("pair encoding follows the row-major pair index") {
    Alphabet a2(2);
    CHECK(pair_encode({1, 2, 1}, a2).symbols == std::vector<int>{2, 3});
    CHECK(pair_encode({2, 2, 2, 2}, a2).symbols == std::vector<int>{4, 4, 4});
    Alphabet a3(3);
    CHECK(pair_encode({1, 1}, a3).symbols == std::vector<int>{1});
}

TEST_CASE("pair encoding rejects short or out-of-range input") {
    Alphabet a2(2);
    CHECK_THROWS_AS(pair_encode({1}, a2), input_error);
    CHECK_THROWS_AS(pair_encode({}, a2), input_error);
    CHECK_THROWS_AS(pair_encode({1, 3}, a2), input_error);
    CHECK_THROWS_AS(pair_encode({0, 1}, a2), input_error);
}

TEST_CASE("pair encoding is chain consistent") {
    Alphabet a(4);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> state(1, 4);
    std::vector<int> y(200);
    for (auto& v : y) v = state(rng);
    const SymbolSequence z = pair_encode(y, a);
    for (std::size_t l = 0; l + 1 < z.size(); ++l)
        CHECK(a.pair_state(z.symbols[l]).second == a.pair_state(z.symbols[l + 1]).first);
}

TEST_CASE("lifting the example 3x3 chain gives the expected 9x9 matrix exactly") {
    const Eigen::MatrixXd p = lift_transition(example_q3());
    Eigen::MatrixXd expected(9, 9);
    expected << 0.1, 0.2, 0.7, 0, 0, 0, 0, 0, 0,
                0, 0, 0, 0, 0.2, 0.8, 0, 0, 0,
                0, 0, 0, 0, 0, 0, 0.6, 0.15, 0.25,
                0.1, 0.2, 0.7, 0, 0, 0, 0, 0, 0,
                0, 0, 0, 0, 0.2, 0.8, 0, 0, 0,
                0, 0, 0, 0, 0, 0, 0.6, 0.15, 0.25,
                0.1, 0.2, 0.7, 0, 0, 0, 0, 0, 0,
                0, 0, 0, 0, 0.2, 0.8, 0, 0, 0,
                0, 0, 0, 0, 0, 0, 0.6, 0.15, 0.25;
    CHECK((p - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lifting a single state chain is the identity") {
    Eigen::MatrixXd q(1, 1);
    q << 1.0;
    const Eigen::MatrixXd p = lift_transition(q);
    REQUIRE(p.rows() == 1);
    CHECK(p(0, 0) == 1.0);
}

TEST_CASE("lifting matches the indicator formula entry by entry") {
    // Independent brute force over all (k,l,i,j).
    const Eigen::MatrixXd q = random_stochastic(2, 11);
    const Eigen::MatrixXd p = lift_transition(q);
    const int n = 2;
    for (int k = 1; k <= n; ++k)
        for (int l = 1; l <= n; ++l)
            for (int i = 1; i <= n; ++i)
                for (int j = 1; j <= n; ++j) {
                    const double expected = (i == l) ? q(i - 1, j - 1) : 0.0;
                    CHECK(p((k - 1) * n + l - 1, (i - 1) * n + j - 1) == expected);
                }
}

TEST_CASE("lifting rejects non-stochastic input") {
    Eigen::MatrixXd q(2, 2);
    q << 0.5, 0.6, 0.5, 0.5;
    CHECK_THROWS_AS(lift_transition(q), input_error);
    q << -0.1, 1.1, 0.5, 0.5;
    CHECK_THROWS_AS(lift_transition(q), input_error);
}

TEST_CASE("stationary law of the example chain matches the dense oracle") {
    const Eigen::MatrixXd p = lift_transition(example_q3());
    const Eigen::VectorXd pi = stationary_law(p);
    CHECK((pi.transpose() * p - pi.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((pi - stationary_dense_oracle(p)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((pi - example_pi3()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("uniform 2x2 chain has the uniform pair law") {
    Eigen::MatrixXd q(2, 2);
    q << 0.5, 0.5, 0.5, 0.5;
    const Eigen::VectorXd pi = stationary_law(lift_transition(q));
    for (int k = 0; k < 4; ++k) CHECK(pi[k] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("stationary law of random lifted chains matches the dense oracle") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Eigen::MatrixXd p = lift_transition(random_stochastic(3, seed));
        CHECK((stationary_law(p) - stationary_dense_oracle(p)).cwiseAbs().maxCoeff() <=
              1e-9);
    }
}

TEST_CASE("stationary law reports non-convergence for a periodic chain") {
    // Period-2 chain whose stationary law is not uniform: power iteration
    // started from uniform oscillates forever.
    Eigen::MatrixXd p(3, 3);
    p << 0.0, 0.5, 0.5,
         1.0, 0.0, 0.0,
         1.0, 0.0, 0.0;
    CHECK_THROWS_AS(stationary_law(p, 1e-12, 500), convergence_error);
    try {
        stationary_law(p, 1e-12, 500);
    } catch (const convergence_error& e) {
        CHECK(e.residual > 0.0);
    }
}

TEST_CASE("conditional rows recover the example chain from its floored law") {
    const Eigen::VectorXd floored = floored_law(example_pi3(), 1e-10);
    const Eigen::MatrixXd q = conditional_rows(floored);
    CHECK((q - example_q3()).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("conditional rows of a uniform law are uniform") {
    const Eigen::MatrixXd q = conditional_rows(Eigen::VectorXd::Constant(4, 0.25));
    CHECK((q.array() - 0.5).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("conditional rows reject nonpositive laws and bad lengths") {
    Eigen::VectorXd with_zero = Eigen::VectorXd::Constant(4, 0.25);
    with_zero[2] = 0.0;
    CHECK_THROWS_AS(conditional_rows(with_zero), input_error);
    CHECK_THROWS_AS(conditional_rows(Eigen::VectorXd::Constant(3, 1.0 / 3)), input_error);
}

TEST_CASE("lift, stationary and conditional rows round trip") {
    for (std::uint64_t seed : {4u, 5u, 6u, 7u}) {
        const Eigen::MatrixXd q = random_stochastic(3, seed);
        const Eigen::MatrixXd back = conditional_rows(stationary_law(lift_transition(q)));
        CHECK((back - q).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("row-group and column-group masses of a stationary pair law agree") {
    for (std::uint64_t seed : {8u, 9u}) {
        const int n = 3;
        const Eigen::VectorXd pi = stationary_law(lift_transition(random_stochastic(n, seed)));
        for (int i = 1; i <= n; ++i) {
            double row = 0.0, col = 0.0;
            for (int t = 1; t <= n; ++t) {
                row += pi[(i - 1) * n + t - 1];
                col += pi[(t - 1) * n + i - 1];
            }
            CHECK(row == doctest::Approx(col).epsilon(1e-10));
        }
    }
}

TEST_CASE("simulation is deterministic and respects degenerate models") {
    const TransitionModel model = make_model(random_stochastic(3, 21));
    const SymbolSequence a = simulate_path(model, 500, 42);
    const SymbolSequence b = simulate_path(model, 500, 42);
    CHECK(a.symbols == b.symbols);
    CHECK(simulate_path(model, 500, 43).symbols != a.symbols);

    Eigen::MatrixXd q1(1, 1);
    q1 << 1.0;
    const SymbolSequence c = simulate_path(make_model(q1), 20, 5);
    for (int s : c.symbols) CHECK(s == 1);

    CHECK_THROWS_AS(simulate_path(model, 0, 1), input_error);
}

TEST_CASE("long simulations concentrate on the stationary law") {
    Eigen::MatrixXd q(2, 2);
    q << 0.5, 0.5, 0.5, 0.5;
    const TransitionModel model = make_model(q);
    const SymbolSequence z = simulate_path(model, 1000000, 2024);
    const EmpiricalLaw law = empirical_law(z, model.alphabet);
    CHECK((law.gamma - model.pi).cwiseAbs().maxCoeff() <= 3e-3);
}

TEST_CASE("empirical law floors and normalizes") {
    Alphabet a2(2);
    SymbolSequence z;
    z.symbols = {1, 2, 1, 2};
    const EmpiricalLaw law = empirical_law(z, a2, 1e-10);
    CHECK(law.gamma.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(law.gamma[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(law.gamma[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(law.gamma[2] > 0.0);
    CHECK(law.gamma[2] == doctest::Approx(1e-10).epsilon(1e-3));
    CHECK(law.sample_size == 4);

    SymbolSequence constant;
    constant.symbols = {1, 1, 1, 1};
    const EmpiricalLaw one = empirical_law(constant, a2, 1e-10);
    CHECK(one.gamma[0] == doctest::Approx(1.0).epsilon(1e-9));
    for (int k = 1; k < 4; ++k) CHECK(one.gamma[k] > 0.0);
}

TEST_CASE("empirical law of a long path approaches the model law") {
    const TransitionModel model = make_model(random_stochastic(4, 31));
    const long n0 = 1000L * model.alphabet.pair_size();
    const EmpiricalLaw law =
        empirical_law(simulate_path(model, n0, 77), model.alphabet);
    CHECK((law.gamma - model.pi).norm() <= 1e-2);
}

TEST_CASE("empirical law rejects bad input") {
    Alphabet a2(2);
    SymbolSequence empty;
    CHECK_THROWS_AS(empirical_law(empty, a2), input_error);
    SymbolSequence z;
    z.symbols = {1, 5};
    CHECK_THROWS_AS(empirical_law(z, a2), input_error);
    z.symbols = {1, 2};
    CHECK_THROWS_AS(empirical_law(z, a2, 0.0), input_error);
}

TEST_CASE("empirical law is a strictly positive probability vector") {
    const TransitionModel model = make_model(random_stochastic(3, 51));
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const EmpiricalLaw law =
            empirical_law(simulate_path(model, 37, seed), model.alphabet);
        CHECK((law.gamma.array() > 0.0).all());
        CHECK(law.gamma.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

}  // TEST_SUITE
