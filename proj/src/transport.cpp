#include "holsim/transport.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <utility>

namespace holsim {

namespace {

// Runs fn(0..n-1), optionally on a worker pool. Failures are collected per
// index and the lowest-index one is rethrown so the reported error does not
// depend on thread scheduling.
template <typename Fn>
void run_indexed(std::size_t n, int jobs, Fn&& fn) {
    std::size_t workers = static_cast<std::size_t>(std::max(1, jobs));
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

ChannelSpec with_uniform_dephasing(const ChannelSpec& base, int n_sites, double gamma) {
    ChannelSpec out = base;
    out.dephasing_rates.assign(static_cast<std::size_t>(n_sites), gamma);
    return out;
}

IntegratorConfig clamp_dt(const IntegratorConfig& cfg, const OperatorMatrix& h,
                          const ChannelSpec& channels) {
    IntegratorConfig out = cfg;
    out.dt = std::min(cfg.dt, suggest_open_dt(h, channels));
    return out;
}

}  // namespace

std::vector<double> site_populations(const DensityMatrix& rho) {
    std::vector<double> pops(static_cast<std::size_t>(rho.dim()));
    for (int i = 0; i < rho.dim(); ++i) pops[static_cast<std::size_t>(i)] = rho.rho(i, i).real();
    return pops;
}

std::vector<double> site_populations(const PureState& psi, const StateLayout& layout) {
    const StateLayout lay = layout.resolve(psi.dim());
    std::vector<double> pops(static_cast<std::size_t>(lay.n_sites), 0.0);
    std::size_t flat = 0;
    for (int site = 0; site < lay.n_sites; ++site) {
        double p = 0.0;
        for (std::size_t b = 0; b < lay.bath_dim; ++b, ++flat) {
            p += std::norm(psi.amplitudes(static_cast<Eigen::Index>(flat)));
        }
        pops[static_cast<std::size_t>(site)] = p;
    }
    return pops;
}

Eigen::MatrixXcd reduce_to_sites(const PureState& psi, const StateLayout& layout) {
    const StateLayout lay = layout.resolve(psi.dim());
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(lay.n_sites, lay.n_sites);
    for (int i = 0; i < lay.n_sites; ++i) {
        for (int j = 0; j < lay.n_sites; ++j) {
            std::complex<double> acc = 0.0;
            const std::size_t oi = static_cast<std::size_t>(i) * lay.bath_dim;
            const std::size_t oj = static_cast<std::size_t>(j) * lay.bath_dim;
            for (std::size_t b = 0; b < lay.bath_dim; ++b) {
                acc += psi.amplitudes(static_cast<Eigen::Index>(oi + b)) *
                       std::conj(psi.amplitudes(static_cast<Eigen::Index>(oj + b)));
            }
            rho(i, j) = acc;
        }
    }
    return rho;
}

double coherence_l1(const Eigen::MatrixXcd& rho) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
            if (i != j) sum += std::abs(rho(i, j));
        }
    }
    return sum;
}

double coherence_l1(const DensityMatrix& rho) { return coherence_l1(rho.rho); }

std::vector<MsdPoint> mean_squared_displacement(const Trajectory& traj, int origin_site,
                                                std::span<const double> positions) {
    if (traj.n_sites <= 0 || traj.records.empty()) {
        throw ValidationError("mean_squared_displacement: empty trajectory");
    }
    if (positions.size() != static_cast<std::size_t>(traj.n_sites)) {
        throw ValidationError("mean_squared_displacement: expected " + std::to_string(traj.n_sites) +
                              " site coordinates, got " + std::to_string(positions.size()));
    }
    if (origin_site < 0 || origin_site >= traj.n_sites) {
        throw ValidationError("mean_squared_displacement: origin site " + std::to_string(origin_site) +
                              " out of range [0, " + std::to_string(traj.n_sites) + ")");
    }
    const double x0 = positions[static_cast<std::size_t>(origin_site)];
    std::vector<MsdPoint> out;
    out.reserve(traj.records.size());
    for (const auto& rec : traj.records) {
        double msd = 0.0;
        for (int i = 0; i < traj.n_sites; ++i) {
            const double dx = positions[static_cast<std::size_t>(i)] - x0;
            msd += rec.populations[static_cast<std::size_t>(i)] * dx * dx;
        }
        out.push_back({rec.t, msd});
    }
    return out;
}

TransferEfficiency transfer_efficiency(const Trajectory& traj, double threshold) {
    if (!traj.has_sink) {
        throw ValidationError("transfer_efficiency requires a trajectory with a sink channel");
    }
    if (traj.records.empty()) {
        throw ValidationError("transfer_efficiency: empty trajectory");
    }
    TransferEfficiency result;
    result.eta = traj.last().sink_captured;
    result.t50 = std::numeric_limits<double>::infinity();
    for (const auto& rec : traj.records) {
        if (rec.sink_captured >= threshold) {
            result.t50 = rec.t;
            break;
        }
    }
    return result;
}

EfficiencyCurve sweep_dephasing(const OpenSystemProblem& problem, std::span<const double> gamma_grid,
                                int jobs) {
    if (!problem.channels.sink.has_value()) {
        throw ValidationError("sweep_dephasing requires a sink channel to define the efficiency");
    }
    if (gamma_grid.empty()) {
        throw ValidationError("sweep_dephasing: empty gamma grid");
    }
    for (std::size_t k = 0; k < gamma_grid.size(); ++k) {
        if (!(gamma_grid[k] >= 0.0)) {
            throw ValidationError("sweep_dephasing: gamma_grid[" + std::to_string(k) +
                                  "] must be >= 0");
        }
    }
    const int n_sites = static_cast<int>(problem.h_system.dim());
    problem.rho0.validate();
    problem.integrator.validate();

    EfficiencyCurve curve;
    curve.sweep_variable = "gamma";
    curve.points.resize(gamma_grid.size());
    run_indexed(gamma_grid.size(), jobs, [&](std::size_t k) {
        const double gamma = gamma_grid[k];
        const ChannelSpec channels = with_uniform_dephasing(problem.channels, n_sites, gamma);
        const IntegratorConfig cfg = clamp_dt(problem.integrator, problem.h_system, channels);
        const Trajectory traj = evolve_open(problem.h_system, channels, problem.rho0, cfg);
        const TransferEfficiency eff = transfer_efficiency(traj);
        curve.points[k] = {gamma, eff.eta, eff.t50};
    });
    return curve;
}

CrossoverReport crossover_scan(const OpenSystemProblem& problem, std::span<const double> gamma_grid,
                               const CrossoverSettings& settings, int jobs) {
    if (problem.channels.sink.has_value()) {
        throw ValidationError("crossover_scan requires a sink-free problem: the spreading fit "
                              "assumes conserved total population");
    }
    if (gamma_grid.empty()) {
        throw ValidationError("crossover_scan: empty gamma grid");
    }
    const int n_sites = static_cast<int>(problem.h_system.dim());
    if (n_sites < 3) {
        throw ValidationError("crossover_scan needs at least 3 sites");
    }
    problem.rho0.validate();
    problem.integrator.validate();

    std::vector<double> positions(settings.positions.begin(), settings.positions.end());
    if (positions.empty()) {
        positions.resize(static_cast<std::size_t>(n_sites));
        for (int i = 0; i < n_sites; ++i) positions[static_cast<std::size_t>(i)] = static_cast<double>(i);
    } else if (positions.size() != static_cast<std::size_t>(n_sites)) {
        throw ValidationError("crossover_scan: expected " + std::to_string(n_sites) +
                              " site coordinates, got " + std::to_string(positions.size()));
    }

    int origin = settings.origin_site;
    if (origin < 0) {
        // default to the most occupied site of the initial state
        double best = -1.0;
        for (int i = 0; i < n_sites; ++i) {
            const double p = problem.rho0.rho(i, i).real();
            if (p > best) {
                best = p;
                origin = i;
            }
        }
    }
    if (origin < 0 || origin >= n_sites) {
        throw ValidationError("crossover_scan: origin site " + std::to_string(origin) +
                              " out of range [0, " + std::to_string(n_sites) + ")");
    }

    double j_typ = settings.typical_coupling;
    if (j_typ <= 0.0) {
        j_typ = 0.0;
        const auto& h = problem.h_system.sparse();
        for (int outer = 0; outer < h.outerSize(); ++outer) {
            for (SparseMatrixXcd::InnerIterator it(h, outer); it; ++it) {
                if (it.row() != it.col()) j_typ = std::max(j_typ, std::abs(it.value()));
            }
        }
    }
    if (j_typ <= 0.0) {
        throw ValidationError("crossover_scan: no inter-site coupling; the spreading exponent "
                              "is undefined on a disconnected network");
    }

    CrossoverReport report;
    const double velocity = 2.0 * j_typ;  // ballistic front speed of a uniform chain
    report.window_lo = settings.window_lo > 0.0 ? settings.window_lo : 2.0 / j_typ;
    // default upper edge: 40% of the time the ballistic front needs to cross
    // half the chain, keeping the fit clear of boundary reflections
    report.window_hi = settings.window_hi > 0.0
                           ? settings.window_hi
                           : 0.4 * (0.5 * static_cast<double>(n_sites)) / velocity;
    if (!(report.window_hi > report.window_lo)) {
        throw ValidationError("crossover_scan: fit window [" + std::to_string(report.window_lo) +
                              ", " + std::to_string(report.window_hi) + "] is empty");
    }
    if (problem.integrator.t_total + 1e-12 < report.window_hi) {
        throw ValidationError("crossover_scan: t_total " + std::to_string(problem.integrator.t_total) +
                              " does not reach the fit window end " + std::to_string(report.window_hi));
    }

    const double x0 = positions[static_cast<std::size_t>(origin)];
    const auto [min_it, max_it] = std::minmax_element(positions.begin(), positions.end());
    const double edge_distance = std::min(x0 - *min_it, *max_it - x0);
    const double reflection_time = edge_distance / velocity;
    if (report.window_hi > reflection_time + 1e-12) {
        report.warnings.push_back(
            "fit window end " + std::to_string(report.window_hi) +
            " exceeds the boundary-reflection bound " + std::to_string(reflection_time) +
            "; ballistic exponents may be biased low");
    }

    report.points.resize(gamma_grid.size());
    run_indexed(gamma_grid.size(), jobs, [&](std::size_t k) {
        const double gamma = gamma_grid[k];
        if (!(gamma >= 0.0)) {
            throw ValidationError("crossover_scan: gamma_grid[" + std::to_string(k) +
                                  "] must be >= 0");
        }
        const ChannelSpec channels = with_uniform_dephasing(problem.channels, n_sites, gamma);
        const IntegratorConfig cfg = clamp_dt(problem.integrator, problem.h_system, channels);
        const Trajectory traj = evolve_open(problem.h_system, channels, problem.rho0, cfg);
        const auto msd = mean_squared_displacement(traj, origin, positions);
        std::vector<std::pair<double, double>> samples;
        samples.reserve(msd.size());
        for (const auto& point : msd) {
            if (point.t < report.window_lo - 1e-12 || point.t > report.window_hi + 1e-12) continue;
            if (point.msd <= 0.0) continue;
            samples.emplace_back(point.t, std::sqrt(point.msd));
        }
        if (samples.size() < 3) {
            throw ValidationError("crossover_scan: only " + std::to_string(samples.size()) +
                                  " usable samples in the fit window; reduce record_stride or widen "
                                  "the window");
        }
        const PowerLawFit fit = fit_spreading_exponent(samples);
        report.points[k] = {gamma, fit.exponent, fit.residual_rms, fit.exponent_std_error};
    });
    return report;
}

}  // namespace holsim
