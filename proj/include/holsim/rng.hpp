// rng.hpp — seeded RNG with portable variate transforms.
//
// mt19937_64 output is fixed by the standard; the std::*_distribution adaptors
// are not, so the uniform/normal transforms are spelled out here to keep the
// same seed producing the same stream on every platform.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "holsim/errors.hpp"

namespace holsim {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Box-Muller; second variate of each pair is cached.
    double normal(double mean, double sd) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + sd * spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return mean + sd * r * std::cos(theta);
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Scalar sampling law for disorder in energies and couplings.
struct Distribution {
    enum class Kind { Constant, Uniform, Normal };

    Kind kind = Kind::Constant;
    double a = 0.0;  // constant value | uniform lower bound | normal mean
    double b = 0.0;  // unused         | uniform upper bound | normal std dev

    static Distribution constant(double value) { return {Kind::Constant, value, 0.0}; }
    static Distribution uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
    static Distribution normal(double mean, double sd) { return {Kind::Normal, mean, sd}; }

    void validate() const {
        if (!std::isfinite(a) || !std::isfinite(b)) {
            throw ValidationError("distribution parameters must be finite");
        }
        if (kind == Kind::Uniform && !(a <= b)) {
            throw ValidationError("uniform distribution requires low <= high, got [" +
                                  std::to_string(a) + ", " + std::to_string(b) + "]");
        }
        if (kind == Kind::Normal && b < 0.0) {
            throw ValidationError("normal distribution requires sd >= 0, got " + std::to_string(b));
        }
    }

    double sample(Rng& rng) const {
        switch (kind) {
            case Kind::Constant: return a;
            case Kind::Uniform: return rng.uniform(a, b);
            case Kind::Normal: return rng.normal(a, b);
        }
        return a;
    }
};

}  // namespace holsim
