// walks.hpp — classical and coined quantum walks on the line, and the
// spreading-exponent fit that classifies ballistic vs diffusive transport.

#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "holsim/errors.hpp"
#include "holsim/rng.hpp"

namespace holsim {

/// Position distribution after M steps; support is -M..M and slots with
/// (position + M) odd carry zero probability.
struct WalkDistribution {
    int steps = 0;
    std::vector<double> probabilities;  // index p + steps for position p

    double probability_at(int position) const;
    double mean() const;
    double stddev() const;
    double total() const;
    void validate() const;
};

/// 2x2 unitary coin and normalized initial coin state. Coin component 0
/// steps the walker right (+1), component 1 steps left (-1).
struct CoinSpec {
    Eigen::Matrix2cd coin;
    Eigen::Vector2cd initial_state;

    static CoinSpec hadamard();            // initial coin |0>
    static CoinSpec hadamard_symmetric();  // initial coin (|0> + i|1>)/sqrt(2)

    void validate() const;
};

/// Exact binomial distribution of the M-step classical walk.
WalkDistribution classical_walk(int steps);

/// Exact amplitude propagation of the coined walk, measured after M steps.
WalkDistribution quantum_walk(int steps, const CoinSpec& coin);

/// Monte Carlo cross-check of the classical walk (sampling, not used by any
/// acceptance path).
WalkDistribution classical_walk_sampled(int steps, long long n_samples, std::uint64_t seed);

struct PowerLawFit {
    double exponent = 0.0;   // alpha in sigma ~ c * tau^alpha
    double prefactor = 0.0;  // c
    double residual_rms = 0.0;        // RMS residual in log space
    double exponent_std_error = 0.0;  // standard error of the fitted slope
};

/// Least-squares fit of log(sigma) against log(tau). Requires >= 3 samples
/// with strictly positive tau and sigma.
PowerLawFit fit_spreading_exponent(std::span<const std::pair<double, double>> samples);

}  // namespace holsim
