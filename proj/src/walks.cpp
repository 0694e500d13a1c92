#include "holsim/walks.hpp"

#include <cmath>
#include <complex>
#include <string>

namespace holsim {

namespace {

using Complex = std::complex<double>;

// Compensated accumulation keeps the moment sums at machine precision for
// step counts up to 1e4.
class KahanSum {
public:
    void add(double v) {
        const double y = v - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

}  // namespace

double WalkDistribution::probability_at(int position) const {
    const int idx = position + steps;
    if (idx < 0 || idx >= static_cast<int>(probabilities.size())) return 0.0;
    return probabilities[static_cast<std::size_t>(idx)];
}

double WalkDistribution::total() const {
    KahanSum s;
    for (double p : probabilities) s.add(p);
    return s.value();
}

double WalkDistribution::mean() const {
    KahanSum s;
    for (int p = -steps; p <= steps; ++p) {
        s.add(probability_at(p) * p);
    }
    return s.value();
}

double WalkDistribution::stddev() const {
    const double mu = mean();
    KahanSum s;
    for (int p = -steps; p <= steps; ++p) {
        const double d = p - mu;
        s.add(probability_at(p) * d * d);
    }
    return std::sqrt(s.value());
}

void WalkDistribution::validate() const {
    if (steps < 0 || probabilities.size() != static_cast<std::size_t>(2 * steps + 1)) {
        throw ValidationError("walk distribution has inconsistent support");
    }
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (probabilities[i] < 0.0) {
            throw ValidationError("walk probabilities must be nonnegative");
        }
        if ((i % 2) == 1 && probabilities[i] != 0.0) {
            throw ValidationError("walk distribution violates parity");
        }
    }
    if (std::abs(total() - 1.0) > 1e-12) {
        throw ValidationError("walk distribution is not normalized");
    }
}

CoinSpec CoinSpec::hadamard() {
    CoinSpec c;
    const double r = 1.0 / std::sqrt(2.0);
    c.coin << r, r, r, -r;
    c.initial_state << Complex{1.0, 0.0}, Complex{0.0, 0.0};
    return c;
}

CoinSpec CoinSpec::hadamard_symmetric() {
    CoinSpec c = hadamard();
    const double r = 1.0 / std::sqrt(2.0);
    c.initial_state << Complex{r, 0.0}, Complex{0.0, r};
    return c;
}

void CoinSpec::validate() const {
    const double unitary_defect =
        (coin.adjoint() * coin - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
    if (unitary_defect > 1e-12) {
        throw ValidationError("coin matrix is not unitary within 1e-12");
    }
    if (std::abs(initial_state.norm() - 1.0) > 1e-12) {
        throw ValidationError("initial coin state is not normalized");
    }
}

WalkDistribution classical_walk(int steps) {
    if (steps < 0) {
        throw ValidationError("step count must be nonnegative");
    }
    if (steps > 1'000'000) {
        throw ValidationError("step count too large");
    }
    WalkDistribution dist;
    dist.steps = steps;
    dist.probabilities.assign(static_cast<std::size_t>(2 * steps + 1), 0.0);
    if (steps == 0) {
        dist.probabilities[0] = 1.0;
        return dist;
    }
    // Binomial weights grown outward from the central coefficient; the far
    // tails underflow harmlessly relative to the center.
    std::vector<double> weight(static_cast<std::size_t>(steps) + 1, 0.0);
    const int center = steps / 2;
    weight[static_cast<std::size_t>(center)] = 1.0;
    for (int k = center; k < steps; ++k) {
        weight[static_cast<std::size_t>(k) + 1] =
            weight[static_cast<std::size_t>(k)] * (static_cast<double>(steps - k) / (k + 1.0));
    }
    for (int k = center; k > 0; --k) {
        weight[static_cast<std::size_t>(k) - 1] =
            weight[static_cast<std::size_t>(k)] * (static_cast<double>(k) / (steps - k + 1.0));
    }
    KahanSum norm;
    for (double w : weight) norm.add(w);
    for (int k = 0; k <= steps; ++k) {
        // position 2k - M at distribution slot (2k - M) + M = 2k
        dist.probabilities[static_cast<std::size_t>(2 * k)] =
            weight[static_cast<std::size_t>(k)] / norm.value();
    }
    return dist;
}

WalkDistribution quantum_walk(int steps, const CoinSpec& coin) {
    if (steps < 0) {
        throw ValidationError("step count must be nonnegative");
    }
    if (steps > 100'000) {
        throw ValidationError("step count too large");
    }
    coin.validate();
    const int width = 2 * steps + 1;
    // amplitudes[coin][position + steps]
    Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(2, width);
    Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(2, width);
    amp(0, steps) = coin.initial_state(0);
    amp(1, steps) = coin.initial_state(1);
    for (int s = 0; s < steps; ++s) {
        next.setZero();
        const int lo = steps - s;
        const int hi = steps + s;
        for (int x = lo; x <= hi; ++x) {
            const Complex a0 = amp(0, x);
            const Complex a1 = amp(1, x);
            if (a0 == Complex{} && a1 == Complex{}) continue;
            const Complex up = coin.coin(0, 0) * a0 + coin.coin(0, 1) * a1;
            const Complex down = coin.coin(1, 0) * a0 + coin.coin(1, 1) * a1;
            next(0, x + 1) += up;    // coin 0 steps right
            next(1, x - 1) += down;  // coin 1 steps left
        }
        std::swap(amp, next);
    }
    WalkDistribution dist;
    dist.steps = steps;
    dist.probabilities.assign(static_cast<std::size_t>(width), 0.0);
    for (int x = 0; x < width; ++x) {
        dist.probabilities[static_cast<std::size_t>(x)] =
            std::norm(amp(0, x)) + std::norm(amp(1, x));
    }
    return dist;
}

WalkDistribution classical_walk_sampled(int steps, long long n_samples, std::uint64_t seed) {
    if (steps < 0 || n_samples < 1) {
        throw ValidationError("sampled walk needs steps >= 0 and at least one sample");
    }
    Rng rng(seed);
    WalkDistribution dist;
    dist.steps = steps;
    dist.probabilities.assign(static_cast<std::size_t>(2 * steps + 1), 0.0);
    for (long long s = 0; s < n_samples; ++s) {
        int pos = 0;
        for (int m = 0; m < steps; ++m) {
            pos += rng.uniform01() < 0.5 ? -1 : 1;
        }
        dist.probabilities[static_cast<std::size_t>(pos + steps)] += 1.0;
    }
    for (double& p : dist.probabilities) p /= static_cast<double>(n_samples);
    return dist;
}

PowerLawFit fit_spreading_exponent(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 3) {
        throw ValidationError("spreading-exponent fit needs at least 3 samples");
    }
    const auto n = static_cast<double>(samples.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [tau, sigma] : samples) {
        if (!(tau > 0.0) || !(sigma > 0.0)) {
            throw ValidationError("spreading-exponent fit requires strictly positive samples");
        }
        const double x = std::log(tau);
        const double y = std::log(sigma);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) {
        throw ValidationError("spreading-exponent fit requires distinct sample times");
    }
    PowerLawFit fit;
    fit.exponent = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - fit.exponent * sx) / n;
    fit.prefactor = std::exp(intercept);
    double ss_res = 0.0;
    for (const auto& [tau, sigma] : samples) {
        const double r = std::log(sigma) - (intercept + fit.exponent * std::log(tau));
        ss_res += r * r;
    }
    fit.residual_rms = std::sqrt(ss_res / n);
    if (samples.size() > 2) {
        const double var_slope = (ss_res / (n - 2.0)) / (sxx - sx * sx / n);
        fit.exponent_std_error = std::sqrt(std::max(var_slope, 0.0));
    }
    return fit;
}

}  // namespace holsim
