// dynamics.hpp — closed (unitary) propagation on the joint space and open
// (Markovian dephasing / hopping / sink) propagation on the reduced site space.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "holsim/errors.hpp"
#include "holsim/krylov.hpp"
#include "holsim/model.hpp"

namespace holsim {

struct PureState {
    Eigen::VectorXcd amplitudes;

    static PureState basis_state(std::size_t dim, std::size_t index);

    std::size_t dim() const { return static_cast<std::size_t>(amplitudes.size()); }
    // |norm - 1| <= 1e-9
    void validate() const;
};

struct DensityMatrix {
    Eigen::MatrixXcd rho;

    static DensityMatrix from_pure(const Eigen::VectorXcd& amplitudes);
    static DensityMatrix site_localized(int n_sites, int site);

    int dim() const { return static_cast<int>(rho.rows()); }
    double trace() const { return rho.trace().real(); }
    /// Hermitian within 1e-12 relative max-norm, trace within 1e-9 of
    /// declared_trace, min eigenvalue >= -1e-9.
    void validate(double declared_trace = 1.0) const;
};

/// Classical stochastic hop from -> to at the given rate.
struct Hop {
    int from = 0;
    int to = 0;
    double rate = 0.0;
};

struct ChannelSpec {
    std::vector<double> dephasing_rates;  // gamma_i per site; empty = all zero
    std::vector<Hop> incoherent_hops;
    std::optional<Sink> sink;             // carried over from the SiteNetwork

    void validate(int n_sites) const;
    bool any_active() const;
    std::vector<double> dephasing_for(int n_sites) const;
};

enum class Method { Auto, DenseExpm, KrylovExpm, Rk4 };

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

struct IntegratorConfig {
    Method method = Method::Auto;
    double dt = 0.01;
    double t_total = 10.0;
    int record_stride = 1;
    double krylov_tol = 1e-12;
    int krylov_max_dim = 96;
    bool record_snapshots = false;

    void validate() const;
};

struct TrajectoryRecord {
    double t = 0.0;
    std::vector<double> populations;  // per site, bath traced out
    double coherence_l1 = 0.0;        // site-basis off-diagonal l1 sum
    double trace = 1.0;               // squared norm for pure states
    double sink_captured = 0.0;       // 1 - trace
    std::optional<Eigen::VectorXcd> state_snapshot;
    std::optional<Eigen::MatrixXcd> rho_snapshot;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    int n_sites = 0;
    bool has_sink = false;
    // conservation diagnostics accumulated over recorded steps
    double max_norm_drift = 0.0;
    double max_energy_drift = 0.0;   // relative, unitary runs only
    double min_eigenvalue = 0.0;     // most negative rho eigenvalue seen, open runs
    double max_hermiticity_defect = 0.0;

    const TrajectoryRecord& last() const { return records.back(); }
};

/// Site-major joint layout: flat index = site * bath_dim + bath index.
/// n_sites == 0 means the whole vector is the site space.
struct StateLayout {
    int n_sites = 0;
    std::size_t bath_dim = 1;

    StateLayout resolve(std::size_t dim) const;
};

/// One-step evolution operator exp(-i H dt), dense or Krylov-applied.
class Propagator {
public:
    static Propagator dense(const OperatorMatrix& hamiltonian, double dt);
    static Propagator krylov(const OperatorMatrix& hamiltonian, double dt, const KrylovOptions& options);

    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
    /// Dense evolution matrix, nullptr for the Krylov form.
    const Eigen::MatrixXcd* matrix() const { return dense_ ? &unitary_ : nullptr; }

private:
    Propagator() = default;
    bool dense_ = false;
    Eigen::MatrixXcd unitary_;           // dense form
    const OperatorMatrix* hamiltonian_ = nullptr;  // krylov form
    double dt_ = 0.0;
    KrylovOptions options_;
};

inline constexpr std::size_t kMaxDenseDim = 4096;   // dense expm refusal point
inline constexpr std::size_t kAutoDenseDim = 512;   // Auto picks dense up to here

/// Resolves Auto by dimension and constructs the one-step propagator.
/// dt == 0 yields the identity. Rk4 is not a unitary-step method and is
/// rejected here.
Propagator step_propagator(const OperatorMatrix& hamiltonian, double dt, Method method,
                           const KrylovOptions& options = {});

/// Unitary trajectory of a pure state under a Hermitian H. Populations and
/// coherence are reduced over the layout's bath factor. Norm and <H> drifts
/// are tracked on every recorded step.
Trajectory evolve_unitary(const OperatorMatrix& hamiltonian, const PureState& psi0,
                          const IntegratorConfig& cfg, const StateLayout& layout = {});

/// Lindblad right-hand side: -i[H, rho] + dephasing + hops + sink capture.
Eigen::MatrixXcd lindblad_rhs(const OperatorMatrix& h_system, const ChannelSpec& channels,
                              const Eigen::MatrixXcd& rho);

/// Open-system trajectory under the master equation (RK4). Trace is
/// conserved without a sink and monotonically non-increasing with one;
/// positivity is monitored at recorded steps.
Trajectory evolve_open(const OperatorMatrix& h_system, const ChannelSpec& channels,
                       const DensityMatrix& rho0, const IntegratorConfig& cfg);

/// Largest-magnitude generator rate scale; used to clamp RK4 steps to the
/// stability region when sweeps push rates far above the scenario baseline.
double suggest_open_dt(const OperatorMatrix& h_system, const ChannelSpec& channels);

}  // namespace holsim
