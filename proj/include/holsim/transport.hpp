// transport.hpp — transport observables and parameter sweeps: transfer
// efficiency, l1-coherence, MSD, dephasing-assisted transport curves, and the
// coherent-to-diffusive crossover scan.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "holsim/dynamics.hpp"
#include "holsim/model.hpp"
#include "holsim/walks.hpp"

namespace holsim {

std::vector<double> site_populations(const DensityMatrix& rho);
std::vector<double> site_populations(const PureState& psi, const StateLayout& layout);

/// Reduced site-space density matrix of a joint pure state.
Eigen::MatrixXcd reduce_to_sites(const PureState& psi, const StateLayout& layout);

/// sum_{i != j} |rho_ij|.
double coherence_l1(const DensityMatrix& rho);
double coherence_l1(const Eigen::MatrixXcd& rho);

struct MsdPoint {
    double t = 0.0;
    double msd = 0.0;
};

/// MSD(t) = sum_i P_i(t) (x_i - x_origin)^2 for sites embedded on a line at
/// the given coordinates (one per site).
std::vector<MsdPoint> mean_squared_displacement(const Trajectory& traj, int origin_site,
                                                std::span<const double> positions);

struct TransferEfficiency {
    double eta = 0.0;  // sink-captured population at the horizon
    double t50 = 0.0;  // first recorded time with capture >= threshold; inf if never
};

/// Requires a sink-bearing trajectory.
TransferEfficiency transfer_efficiency(const Trajectory& traj, double threshold = 0.5);

struct EfficiencyPoint {
    double parameter = 0.0;
    double eta = 0.0;
    double t50 = 0.0;
};

struct EfficiencyCurve {
    std::string sweep_variable;
    std::vector<EfficiencyPoint> points;
};

/// Open-system experiment with everything fixed except the swept parameter.
struct OpenSystemProblem {
    OperatorMatrix h_system;
    ChannelSpec channels;
    DensityMatrix rho0;
    IntegratorConfig integrator;
};

/// One evolve_open run per gamma with uniform site dephasing set to gamma;
/// dt is clamped per point to the RK4 stability suggestion. Deterministic;
/// points may be computed in parallel but are assembled in grid order.
EfficiencyCurve sweep_dephasing(const OpenSystemProblem& problem, std::span<const double> gamma_grid,
                                int jobs = 1);

struct CrossoverPoint {
    double gamma = 0.0;
    double alpha = 0.0;
    double residual = 0.0;
    double alpha_std_error = 0.0;
};

struct CrossoverReport {
    std::vector<CrossoverPoint> points;
    std::vector<std::string> warnings;
    double window_lo = 0.0;
    double window_hi = 0.0;
};

struct CrossoverSettings {
    double window_lo = -1.0;   // < 0: auto 2 / J_typ
    double window_hi = -1.0;   // < 0: auto 0.4 * N / (2 v), v = 2 J_typ
    int origin_site = -1;      // < 0: initial-state site
    std::vector<double> positions;  // empty: site indices 0..N-1
    double typical_coupling = 0.0;  // <= 0: max |t_ij| is taken from the Hamiltonian
};

/// Spreading-exponent scan over dephasing rates on a sink-free chain:
/// for each gamma evolve_open, fit sigma(t) = sqrt(MSD) over the early-time
/// window. A window reaching past the boundary-reflection bound is reported
/// on the warning channel.
CrossoverReport crossover_scan(const OpenSystemProblem& problem, std::span<const double> gamma_grid,
                               const CrossoverSettings& settings = {}, int jobs = 1);

}  // namespace holsim
