#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "holsim/walks.hpp"

using namespace holsim;

namespace {

using Complex = std::complex<double>;

// Brute-force oracle: sum amplitude products over all 2^M coin histories.
// Completely independent of the stepped evolution in quantum_walk.
std::vector<double> enumerate_quantum_walk(int steps, const CoinSpec& spec) {
    std::vector<double> probs(static_cast<std::size_t>(2 * steps + 1), 0.0);
    // state: (position offset, final coin component) -> amplitude
    struct Path {
        int position;
        int coin;
        Complex amplitude;
    };
    std::vector<Path> paths{{0, 0, spec.initial_state(0)}, {0, 1, spec.initial_state(1)}};
    for (int s = 0; s < steps; ++s) {
        std::vector<Path> next;
        next.reserve(paths.size() * 2);
        for (const Path& p : paths) {
            for (int out = 0; out < 2; ++out) {
                const Complex a = spec.coin(out, p.coin) * p.amplitude;
                next.push_back({p.position + (out == 0 ? 1 : -1), out, a});
            }
        }
        paths = std::move(next);
    }
    // coherent sum per (position, coin), then squared magnitudes
    Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(2, 2 * steps + 1);
    for (const Path& p : paths) amp(p.coin, p.position + steps) += p.amplitude;
    for (int x = 0; x <= 2 * steps; ++x) {
        probs[static_cast<std::size_t>(x)] = std::norm(amp(0, x)) + std::norm(amp(1, x));
    }
    return probs;
}

}  // namespace

TEST_SUITE("walks") {

TEST_CASE("classical M=4 walk reproduces the exact binomial") {
    const WalkDistribution dist = classical_walk(4);
    CHECK(dist.probability_at(-4) == doctest::Approx(1.0 / 16));
    CHECK(dist.probability_at(-2) == doctest::Approx(4.0 / 16));
    CHECK(dist.probability_at(0) == doctest::Approx(6.0 / 16));
    CHECK(dist.probability_at(2) == doctest::Approx(4.0 / 16));
    CHECK(dist.probability_at(4) == doctest::Approx(1.0 / 16));
    CHECK(dist.probability_at(1) == 0.0);
    CHECK(dist.probability_at(3) == 0.0);
    CHECK(dist.mean() == doctest::Approx(0.0));
    CHECK_NOTHROW(dist.validate());
}

TEST_CASE("classical standard deviation is sqrt(M) to machine precision") {
    for (const int m : {16, 64, 256, 1024, 10000}) {
        const WalkDistribution dist = classical_walk(m);
        const double sigma = dist.stddev();
        CAPTURE(m);
        CHECK(std::abs(sigma - std::sqrt(static_cast<double>(m))) <
              1e-12 * std::sqrt(static_cast<double>(m)));
        CHECK(std::abs(dist.total() - 1.0) < 1e-13);
    }
}

TEST_CASE("hadamard walk first steps match hand enumeration") {
    SUBCASE("M=1 splits evenly") {
        const WalkDistribution dist = quantum_walk(1, CoinSpec::hadamard());
        CHECK(dist.probability_at(1) == doctest::Approx(0.5));
        CHECK(dist.probability_at(-1) == doctest::Approx(0.5));
    }
    SUBCASE("M=2 from coin |0> is still symmetric") {
        const WalkDistribution dist = quantum_walk(2, CoinSpec::hadamard());
        CHECK(dist.probability_at(-2) == doctest::Approx(0.25));
        CHECK(dist.probability_at(0) == doctest::Approx(0.5));
        CHECK(dist.probability_at(2) == doctest::Approx(0.25));
    }
    SUBCASE("M=3 develops the right-side bias of coin |0>") {
        const WalkDistribution dist = quantum_walk(3, CoinSpec::hadamard());
        CHECK(dist.probability_at(-3) == doctest::Approx(1.0 / 8));
        CHECK(dist.probability_at(-1) == doctest::Approx(1.0 / 8));
        CHECK(dist.probability_at(1) == doctest::Approx(5.0 / 8));
        CHECK(dist.probability_at(3) == doctest::Approx(1.0 / 8));
    }
}

TEST_CASE("quantum walk equals the path-enumeration oracle at M=8") {
    for (const CoinSpec& spec : {CoinSpec::hadamard(), CoinSpec::hadamard_symmetric()}) {
        const WalkDistribution dist = quantum_walk(8, spec);
        const std::vector<double> oracle = enumerate_quantum_walk(8, spec);
        REQUIRE(dist.probabilities.size() == oracle.size());
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            CHECK(std::abs(dist.probabilities[i] - oracle[i]) < 1e-12);
        }
    }
}

TEST_CASE("symmetric coin gives a left-right symmetric distribution") {
    const WalkDistribution dist = quantum_walk(31, CoinSpec::hadamard_symmetric());
    for (int x = 1; x <= 31; ++x) {
        CHECK(std::abs(dist.probability_at(x) - dist.probability_at(-x)) < 1e-12);
    }
    CHECK(std::abs(dist.total() - 1.0) < 1e-12);
    CHECK_NOTHROW(dist.validate());
}

TEST_CASE("hadamard walk spreads ballistically, classical diffusively") {
    std::vector<std::pair<double, double>> quantum_samples;
    std::vector<std::pair<double, double>> classical_samples;
    for (const int m : {64, 128, 256, 512, 1024}) {
        quantum_samples.emplace_back(m, quantum_walk(m, CoinSpec::hadamard()).stddev());
        classical_samples.emplace_back(m, classical_walk(m).stddev());
    }
    const PowerLawFit quantum = fit_spreading_exponent(quantum_samples);
    const PowerLawFit classical = fit_spreading_exponent(classical_samples);
    CHECK(quantum.exponent >= 0.95);
    CHECK(std::abs(classical.exponent - 0.5) <= 0.01);
    CHECK(classical.residual_rms < 1e-3);
}

TEST_CASE("parity structure holds for both walk kinds") {
    for (const int m : {5, 6}) {
        const WalkDistribution cl = classical_walk(m);
        const WalkDistribution qu = quantum_walk(m, CoinSpec::hadamard());
        for (int x = -m; x <= m; ++x) {
            if ((x + m) % 2 != 0) {
                CHECK(cl.probability_at(x) == 0.0);
                CHECK(qu.probability_at(x) == 0.0);
            }
        }
    }
}

TEST_CASE("sampled classical walk agrees with the exact moments") {
    const WalkDistribution sampled = classical_walk_sampled(64, 200000, 12345);
    CHECK(std::abs(sampled.total() - 1.0) < 1e-12);
    CHECK(std::abs(sampled.mean()) < 0.1);
    CHECK(std::abs(sampled.stddev() - 8.0) < 0.15);
    // determinism of the seeded sampler
    const WalkDistribution again = classical_walk_sampled(64, 200000, 12345);
    CHECK(sampled.probabilities == again.probabilities);
}

TEST_CASE("power-law fit recovers a synthetic exponent exactly") {
    std::vector<std::pair<double, double>> samples;
    for (const double t : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        samples.emplace_back(t, 3.0 * std::pow(t, 0.75));
    }
    const PowerLawFit fit = fit_spreading_exponent(samples);
    CHECK(fit.exponent == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(fit.prefactor == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.residual_rms < 1e-12);
    CHECK(fit.exponent_std_error < 1e-12);
}

TEST_CASE("fit input validation") {
    std::vector<std::pair<double, double>> two{{1.0, 1.0}, {2.0, 2.0}};
    CHECK_THROWS_AS(fit_spreading_exponent(two), ValidationError);
    std::vector<std::pair<double, double>> nonpos{{1.0, 1.0}, {2.0, 0.0}, {3.0, 2.0}};
    CHECK_THROWS_AS(fit_spreading_exponent(nonpos), ValidationError);
    std::vector<std::pair<double, double>> dup{{1.0, 1.0}, {1.0, 2.0}, {1.0, 3.0}};
    CHECK_THROWS_AS(fit_spreading_exponent(dup), ValidationError);
}

TEST_CASE("walk input guards") {
    // zero steps is the degenerate delta distribution, not an error
    const WalkDistribution still = classical_walk(0);
    REQUIRE(still.probabilities.size() == 1);
    CHECK(still.probability_at(0) == 1.0);
    CHECK_THROWS_AS(classical_walk(-1), ValidationError);
    CHECK_THROWS_AS(quantum_walk(-1, CoinSpec::hadamard()), ValidationError);
    CoinSpec bad = CoinSpec::hadamard();
    bad.coin(0, 0) = 2.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

}  // TEST_SUITE
