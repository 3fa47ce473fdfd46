#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace markovht {

/// Default floor applied to empirical frequencies so downstream logs and
/// divisions stay defined.
inline constexpr double kDefaultFloorEps = 1e-10;

/// Finite alphabet of the original chain (N symbols) plus its derived pair
/// alphabet (N^2 symbols). Pair (i, j), both 1-based, maps to the row-major
/// pair index k = (i - 1) * N + j; every module shares this convention.
struct Alphabet {
    int n_states = 0;

    Alphabet() = default;
    explicit Alphabet(int n);

    int pair_size() const { return n_states * n_states; }
    int pair_index(int i, int j) const { return (i - 1) * n_states + j; }
    std::pair<int, int> pair_state(int k) const {
        return {(k - 1) / n_states + 1, (k - 1) % n_states + 1};
    }
};

/// Sequence of 1-based pair-state symbols, optionally timestamped (seconds).
/// timestamps is either empty or has exactly one entry per symbol.
struct SymbolSequence {
    std::vector<int> symbols;
    std::vector<double> timestamps;

    std::size_t size() const { return symbols.size(); }
    bool empty() const { return symbols.empty(); }
    bool timestamped() const { return !timestamps.empty(); }
};

/// A finite-state chain together with its pair-chain lift:
///   q  - N x N row-stochastic transition matrix of the original chain,
///   p  - N^2 x N^2 lifted matrix, p[(k,l) -> (i,j)] = 1{i == l} * q(i, j),
///   pi - stationary law of p (length N^2).
/// Immutable after construction; safe to share across threads.
struct TransitionModel {
    Alphabet alphabet;
    Eigen::MatrixXd q;
    Eigen::MatrixXd p;
    Eigen::VectorXd pi;
};

/// Floored, renormalized empirical distribution over the pair alphabet.
/// Entries are strictly positive and sum to one.
struct EmpiricalLaw {
    Eigen::VectorXd gamma;
    double floor_eps = kDefaultFloorEps;
    long sample_size = 0;
};

/// Map an original-chain path y (1-based states, length >= 2) to the sequence
/// of len(y) - 1 pair symbols (y_{l-1}, y_l).
SymbolSequence pair_encode(const std::vector<int>& y, const Alphabet& alphabet);

/// Lift an N x N row-stochastic matrix to the N^2 x N^2 pair-chain matrix.
/// Throws input_error if a row sum deviates from 1 by more than 1e-9 or an
/// entry is negative.
Eigen::MatrixXd lift_transition(const Eigen::MatrixXd& q);

/// Stationary law of a row-stochastic matrix by power iteration: returns pi
/// with ||pi' P - pi'||_inf <= tol. Throws convergence_error (with the final
/// residual) if max_iter is exhausted, e.g. for periodic chains.
Eigen::VectorXd stationary_law(const Eigen::MatrixXd& p, double tol = 1e-12,
                               int max_iter = 100000);

/// Row-conditional matrix of a strictly positive pair law:
/// Q(i, j) = pi_ij / sum_t pi_it. The result is N x N row-stochastic.
Eigen::MatrixXd conditional_rows(const Eigen::VectorXd& pi);

/// Validate q and assemble the full model (lift + stationary law). The
/// stationary law is polished to 1e-14 so that downstream series truncated at
/// 1e-12 have a well-resolved limit.
TransitionModel make_model(const Eigen::MatrixXd& q, double stationary_tol = 1e-14,
                           int max_iter = 100000);

/// Draw n pair symbols from the lifted chain, first symbol from pi.
/// Deterministic for a fixed seed. No timestamps are attached.
SymbolSequence simulate_path(const TransitionModel& model, long n, std::uint64_t seed);

/// Empirical pair law of a symbol sequence: per-state frequency, floored at
/// eps (max{freq, eps}), then normalized.
EmpiricalLaw empirical_law(const SymbolSequence& z, const Alphabet& alphabet,
                           double eps = kDefaultFloorEps);

/// Floor an arbitrary nonnegative law at eps and renormalize; used to make
/// exact reference laws with zero entries usable by the divergence machinery.
Eigen::VectorXd floored_law(const Eigen::VectorXd& law, double eps = kDefaultFloorEps);

}  // namespace markovht
