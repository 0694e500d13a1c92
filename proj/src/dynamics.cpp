#include "holsim/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace holsim {

namespace {

constexpr double kNormTol = 1e-9;
constexpr double kHermTolRel = 1e-12;
constexpr double kPositivityTol = 1e-8;

struct StepPlan {
    long long n_steps = 0;     // full dt steps
    double remainder = 0.0;    // trailing partial step, 0 if none
    long long total_steps() const { return n_steps + (remainder > 0.0 ? 1 : 0); }
    double time_at(long long step, double dt, double t_total) const {
        return step == total_steps() ? t_total : static_cast<double>(step) * dt;
    }
};

StepPlan plan_steps(double dt, double t_total) {
    StepPlan plan;
    plan.n_steps = static_cast<long long>(std::floor(t_total / dt + 1e-9));
    const double covered = static_cast<double>(plan.n_steps) * dt;
    const double rem = t_total - covered;
    plan.remainder = (rem > 1e-12 * std::max(1.0, t_total)) ? rem : 0.0;
    return plan;
}

Eigen::MatrixXcd reduce_over_bath(const Eigen::VectorXcd& psi, int n_sites, std::size_t bath_dim) {
    Eigen::MatrixXcd rho(n_sites, n_sites);
    for (int i = 0; i < n_sites; ++i) {
        for (int j = 0; j <= i; ++j) {
            Complex sum{0.0, 0.0};
            for (std::size_t b = 0; b < bath_dim; ++b) {
                sum += psi(static_cast<Eigen::Index>(i * bath_dim + b)) *
                       std::conj(psi(static_cast<Eigen::Index>(j * bath_dim + b)));
            }
            rho(i, j) = sum;
            rho(j, i) = std::conj(sum);
        }
    }
    return rho;
}

double l1_offdiagonal(const Eigen::MatrixXcd& rho) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
            if (i != j) sum += std::abs(rho(i, j));
        }
    }
    return sum;
}

}  // namespace

PureState PureState::basis_state(std::size_t dim, std::size_t index) {
    if (index >= dim) {
        throw ValidationError("basis state index out of range");
    }
    PureState s;
    s.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    s.amplitudes(static_cast<Eigen::Index>(index)) = Complex{1.0, 0.0};
    return s;
}

void PureState::validate() const {
    if (amplitudes.size() == 0) {
        throw ValidationError("pure state is empty");
    }
    if (std::abs(amplitudes.norm() - 1.0) > kNormTol) {
        throw ValidationError("pure state norm deviates from 1 beyond 1e-9");
    }
}

DensityMatrix DensityMatrix::from_pure(const Eigen::VectorXcd& amplitudes) {
    DensityMatrix d;
    d.rho = amplitudes * amplitudes.adjoint();
    return d;
}

DensityMatrix DensityMatrix::site_localized(int n_sites, int site) {
    if (site < 0 || site >= n_sites) {
        throw ValidationError("initial site index out of range");
    }
    DensityMatrix d;
    d.rho = Eigen::MatrixXcd::Zero(n_sites, n_sites);
    d.rho(site, site) = Complex{1.0, 0.0};
    return d;
}

void DensityMatrix::validate(double declared_trace) const {
    if (rho.rows() != rho.cols() || rho.rows() == 0) {
        throw ValidationError("density matrix must be square and nonempty");
    }
    const double scale = rho.cwiseAbs().maxCoeff();
    const double herm_defect = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm_defect > kHermTolRel * std::max(scale, 1e-300)) {
        throw ValidationError("density matrix is not Hermitian within tolerance");
    }
    if (std::abs(trace() - declared_trace) > kNormTol) {
        throw ValidationError("density matrix trace deviates from its declared value");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9) {
        throw ValidationError("density matrix has an eigenvalue below -1e-9");
    }
}

void ChannelSpec::validate(int n_sites) const {
    if (!dephasing_rates.empty() && static_cast<int>(dephasing_rates.size()) != n_sites) {
        throw ValidationError("dephasing rate list length " + std::to_string(dephasing_rates.size()) +
                              " does not match site count " + std::to_string(n_sites));
    }
    for (double g : dephasing_rates) {
        if (!(g >= 0.0) || !std::isfinite(g)) {
            throw ValidationError("dephasing rates must be nonnegative and finite");
        }
    }
    for (const Hop& hop : incoherent_hops) {
        if (hop.from < 0 || hop.from >= n_sites || hop.to < 0 || hop.to >= n_sites) {
            throw ValidationError("hop (" + std::to_string(hop.from) + " -> " + std::to_string(hop.to) +
                                  ") has a site index outside [0, " + std::to_string(n_sites) + ")");
        }
        if (hop.from == hop.to) {
            throw ValidationError("hop must connect two distinct sites");
        }
        if (!(hop.rate >= 0.0) || !std::isfinite(hop.rate)) {
            throw ValidationError("hop rates must be nonnegative and finite");
        }
    }
    if (sink && (!(sink->rate >= 0.0) || !std::isfinite(sink->rate))) {
        throw ValidationError("sink rate must be nonnegative and finite");
    }
    if (sink && (sink->site < 0 || sink->site >= n_sites)) {
        throw ValidationError("sink site outside [0, " + std::to_string(n_sites) + ")");
    }
}

bool ChannelSpec::any_active() const {
    for (double g : dephasing_rates) {
        if (g > 0.0) return true;
    }
    for (const Hop& hop : incoherent_hops) {
        if (hop.rate > 0.0) return true;
    }
    return sink && sink->rate > 0.0;
}

std::vector<double> ChannelSpec::dephasing_for(int n_sites) const {
    if (dephasing_rates.empty()) return std::vector<double>(static_cast<std::size_t>(n_sites), 0.0);
    return dephasing_rates;
}

const char* method_name(Method m) {
    switch (m) {
        case Method::Auto: return "auto";
        case Method::DenseExpm: return "dense-expm";
        case Method::KrylovExpm: return "krylov-expm";
        case Method::Rk4: return "rk4";
    }
    return "unknown";
}

std::optional<Method> method_from_name(const std::string& name) {
    if (name == "auto") return Method::Auto;
    if (name == "dense-expm") return Method::DenseExpm;
    if (name == "krylov-expm") return Method::KrylovExpm;
    if (name == "rk4") return Method::Rk4;
    return std::nullopt;
}

void IntegratorConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ValidationError("integrator dt must be positive and finite");
    }
    if (!(t_total > 0.0) || !std::isfinite(t_total)) {
        throw ValidationError("integrator t_total must be positive and finite");
    }
    if (dt > t_total * (1.0 + 1e-12)) {
        throw ValidationError("integrator requires dt <= t_total");
    }
    if (record_stride < 1) {
        throw ValidationError("record stride must be >= 1");
    }
    if (!(krylov_tol > 0.0)) {
        throw ValidationError("krylov tolerance must be positive");
    }
    if (krylov_max_dim < 2) {
        throw ValidationError("krylov subspace bound must be >= 2");
    }
}

StateLayout StateLayout::resolve(std::size_t dim) const {
    if (n_sites == 0) {
        return StateLayout{static_cast<int>(dim), 1};
    }
    if (static_cast<std::size_t>(n_sites) * bath_dim != dim) {
        throw ValidationError("state layout " + std::to_string(n_sites) + " x " +
                              std::to_string(bath_dim) + " does not match dimension " +
                              std::to_string(dim));
    }
    return *this;
}

Propagator Propagator::dense(const OperatorMatrix& hamiltonian, double dt) {
    if (!hamiltonian.hermitian()) {
        throw ValidationError("propagator requires a Hermitian Hamiltonian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hamiltonian.dense());
    const Eigen::VectorXd& lambda = es.eigenvalues();
    const Eigen::MatrixXcd& vecs = es.eigenvectors();
    Eigen::VectorXcd phases(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        phases(i) = std::exp(Complex{0.0, -lambda(i) * dt});
    }
    Propagator p;
    p.dense_ = true;
    p.unitary_ = vecs * phases.asDiagonal() * vecs.adjoint();
    const double defect = (p.unitary_.adjoint() * p.unitary_ -
                           Eigen::MatrixXcd::Identity(lambda.size(), lambda.size()))
                              .cwiseAbs()
                              .maxCoeff();
    if (defect > 1e-10) {
        throw IntegratorError("dense propagator unitarity defect " + std::to_string(defect) +
                              " exceeds 1e-10");
    }
    return p;
}

Propagator Propagator::krylov(const OperatorMatrix& hamiltonian, double dt, const KrylovOptions& options) {
    if (!hamiltonian.hermitian()) {
        throw ValidationError("propagator requires a Hermitian Hamiltonian");
    }
    Propagator p;
    p.dense_ = false;
    p.hamiltonian_ = &hamiltonian;
    p.dt_ = dt;
    p.options_ = options;
    return p;
}

Eigen::VectorXcd Propagator::apply(const Eigen::VectorXcd& v) const {
    if (dense_) {
        if (unitary_.cols() != v.size()) {
            throw ValidationError("propagator dimension mismatch");
        }
        return unitary_ * v;
    }
    return krylov_expv(*hamiltonian_, v, dt_, options_);
}

Propagator step_propagator(const OperatorMatrix& hamiltonian, double dt, Method method,
                           const KrylovOptions& options) {
    if (dt < 0.0 || !std::isfinite(dt)) {
        throw ValidationError("propagator step must be nonnegative and finite");
    }
    Method resolved = method;
    if (resolved == Method::Auto) {
        resolved = hamiltonian.dim() <= kAutoDenseDim ? Method::DenseExpm : Method::KrylovExpm;
    }
    switch (resolved) {
        case Method::DenseExpm:
            if (hamiltonian.dim() > kMaxDenseDim) {
                throw ResourceError("dense-expm unavailable at dimension " +
                                    std::to_string(hamiltonian.dim()) + " (limit " +
                                    std::to_string(kMaxDenseDim) + "); use krylov-expm");
            }
            return Propagator::dense(hamiltonian, dt);
        case Method::KrylovExpm:
            return Propagator::krylov(hamiltonian, dt, options);
        case Method::Rk4:
            throw ValidationError("rk4 integrates the open-system generator, not unitary steps");
        case Method::Auto:
            break;
    }
    throw ValidationError("unresolved propagator method");
}

Trajectory evolve_unitary(const OperatorMatrix& hamiltonian, const PureState& psi0,
                          const IntegratorConfig& cfg, const StateLayout& layout_in) {
    cfg.validate();
    psi0.validate();
    if (hamiltonian.dim() != psi0.dim()) {
        throw ValidationError("Hamiltonian dimension " + std::to_string(hamiltonian.dim()) +
                              " does not match state dimension " + std::to_string(psi0.dim()));
    }
    if (!hamiltonian.hermitian()) {
        throw ValidationError("evolve_unitary requires a Hermitian Hamiltonian");
    }
    const StateLayout layout = layout_in.resolve(psi0.dim());

    KrylovOptions kopt;
    kopt.tolerance = cfg.krylov_tol;
    kopt.max_subspace = cfg.krylov_max_dim;
    const Propagator step = step_propagator(hamiltonian, cfg.dt, cfg.method, kopt);
    const StepPlan plan = plan_steps(cfg.dt, cfg.t_total);

    Trajectory traj;
    traj.n_sites = layout.n_sites;
    traj.has_sink = false;

    Eigen::VectorXcd psi = psi0.amplitudes;
    const double energy0 = (psi.adjoint() * hamiltonian.apply(psi))(0).real();
    const double energy_scale = std::max(std::abs(energy0), hamiltonian.max_abs());

    auto record = [&](double t) {
        TrajectoryRecord rec;
        rec.t = t;
        const Eigen::MatrixXcd rho = reduce_over_bath(psi, layout.n_sites, layout.bath_dim);
        rec.populations.resize(static_cast<std::size_t>(layout.n_sites));
        for (int i = 0; i < layout.n_sites; ++i) {
            rec.populations[static_cast<std::size_t>(i)] = rho(i, i).real();
        }
        rec.coherence_l1 = l1_offdiagonal(rho);
        const double norm = psi.norm();
        rec.trace = norm * norm;
        rec.sink_captured = 0.0;
        if (cfg.record_snapshots) rec.state_snapshot = psi;
        traj.max_norm_drift = std::max(traj.max_norm_drift, std::abs(norm - 1.0));
        if (energy_scale > 0.0) {
            const double energy = (psi.adjoint() * hamiltonian.apply(psi))(0).real();
            traj.max_energy_drift =
                std::max(traj.max_energy_drift, std::abs(energy - energy0) / energy_scale);
        }
        traj.records.push_back(std::move(rec));
    };

    record(0.0);
    for (long long s = 1; s <= plan.n_steps; ++s) {
        psi = step.apply(psi);
        if (s % cfg.record_stride == 0 || (s == plan.total_steps())) {
            record(plan.time_at(s, cfg.dt, cfg.t_total));
        }
    }
    if (plan.remainder > 0.0) {
        const Propagator last = step_propagator(hamiltonian, plan.remainder, cfg.method, kopt);
        psi = last.apply(psi);
        record(cfg.t_total);
    }
    return traj;
}

Eigen::MatrixXcd lindblad_rhs(const OperatorMatrix& h_system, const ChannelSpec& channels,
                              const Eigen::MatrixXcd& rho) {
    const int n = static_cast<int>(rho.rows());
    // coherent part
    const Eigen::MatrixXcd h_rho = h_system.sparse() * rho;
    Eigen::MatrixXcd out = Complex{0.0, -1.0} * (h_rho - h_rho.adjoint());
    // pure dephasing with site projectors acts entrywise on coherences
    if (!channels.dephasing_rates.empty()) {
        const std::vector<double>& gamma = channels.dephasing_rates;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                out(i, j) -= 0.5 * (gamma[static_cast<std::size_t>(i)] + gamma[static_cast<std::size_t>(j)]) * rho(i, j);
            }
        }
    }
    // classical hops: L = |to><from|
    for (const Hop& hop : channels.incoherent_hops) {
        if (hop.rate == 0.0) continue;
        out(hop.to, hop.to) += hop.rate * rho(hop.from, hop.from);
        out.row(hop.from) -= 0.5 * hop.rate * rho.row(hop.from);
        out.col(hop.from) -= 0.5 * hop.rate * rho.col(hop.from);
    }
    // sink: anti-Hermitian capture, -kappa {P_s, rho}
    if (channels.sink && channels.sink->rate > 0.0) {
        const int s = channels.sink->site;
        const double kappa = channels.sink->rate;
        out.row(s) -= kappa * rho.row(s);
        out.col(s) -= kappa * rho.col(s);
    }
    return out;
}

Trajectory evolve_open(const OperatorMatrix& h_system, const ChannelSpec& channels,
                       const DensityMatrix& rho0, const IntegratorConfig& cfg) {
    cfg.validate();
    const int n = rho0.dim();
    if (h_system.dim() != static_cast<std::size_t>(n)) {
        throw ValidationError("system Hamiltonian dimension does not match the density matrix");
    }
    if (!h_system.hermitian()) {
        throw ValidationError("evolve_open requires a Hermitian system Hamiltonian");
    }
    channels.validate(n);
    rho0.validate(rho0.trace());
    if (cfg.method != Method::Auto && cfg.method != Method::Rk4) {
        throw ValidationError(std::string("open-system evolution uses rk4; method '") +
                              method_name(cfg.method) + "' applies to unitary runs");
    }

    ChannelSpec ch = channels;
    ch.dephasing_rates = channels.dephasing_for(n);

    const StepPlan plan = plan_steps(cfg.dt, cfg.t_total);
    Trajectory traj;
    traj.n_sites = n;
    traj.has_sink = ch.sink.has_value();
    traj.min_eigenvalue = 0.0;

    Eigen::MatrixXcd rho = rho0.rho;

    auto rk4_step = [&](const Eigen::MatrixXcd& r, double h) {
        const Eigen::MatrixXcd k1 = lindblad_rhs(h_system, ch, r);
        const Eigen::MatrixXcd k2 = lindblad_rhs(h_system, ch, r + (0.5 * h) * k1);
        const Eigen::MatrixXcd k3 = lindblad_rhs(h_system, ch, r + (0.5 * h) * k2);
        const Eigen::MatrixXcd k4 = lindblad_rhs(h_system, ch, r + h * k3);
        Eigen::MatrixXcd next = r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        return Eigen::MatrixXcd(0.5 * (next + next.adjoint()));
    };

    auto record = [&](double t) {
        TrajectoryRecord rec;
        rec.t = t;
        rec.populations.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) rec.populations[static_cast<std::size_t>(i)] = rho(i, i).real();
        rec.coherence_l1 = l1_offdiagonal(rho);
        rec.trace = rho.trace().real();
        rec.sink_captured = traj.has_sink ? std::max(0.0, 1.0 - rec.trace) : 0.0;
        if (cfg.record_snapshots) rec.rho_snapshot = rho;

        const double scale = std::max(rho.cwiseAbs().maxCoeff(), 1e-300);
        traj.max_hermiticity_defect = std::max(
            traj.max_hermiticity_defect, (rho - rho.adjoint()).cwiseAbs().maxCoeff() / scale);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
        const double min_eig = es.eigenvalues().minCoeff();
        traj.min_eigenvalue = std::min(traj.min_eigenvalue, min_eig);
        if (min_eig < -kPositivityTol) {
            throw IntegratorError("density matrix lost positivity (min eigenvalue " +
                                  std::to_string(min_eig) + " at t=" + std::to_string(t) +
                                  "); reduce the integrator dt");
        }
        traj.records.push_back(std::move(rec));
    };

    record(0.0);
    for (long long s = 1; s <= plan.n_steps; ++s) {
        rho = rk4_step(rho, cfg.dt);
        if (s % cfg.record_stride == 0 || s == plan.total_steps()) {
            record(plan.time_at(s, cfg.dt, cfg.t_total));
        }
    }
    if (plan.remainder > 0.0) {
        rho = rk4_step(rho, plan.remainder);
        record(cfg.t_total);
    }
    return traj;
}

double suggest_open_dt(const OperatorMatrix& h_system, const ChannelSpec& channels) {
    // row-sum bound on ||H|| plus the largest channel rates
    const Eigen::MatrixXcd h = h_system.dense();
    double h_norm = 0.0;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        h_norm = std::max(h_norm, h.row(i).cwiseAbs().sum());
    }
    double gamma_max = 0.0;
    for (double g : channels.dephasing_rates) gamma_max = std::max(gamma_max, g);
    double hop_total = 0.0;
    for (const Hop& hop : channels.incoherent_hops) hop_total += hop.rate;
    const double rate = h_norm + gamma_max + hop_total + (channels.sink ? channels.sink->rate : 0.0);
    return 0.25 / std::max(rate, 1e-12);
}

}  // namespace holsim
