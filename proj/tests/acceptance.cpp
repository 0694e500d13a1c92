// Acceptance gate: one self-contained check per headline capability, each
// printed as a single [PASS]/[FAIL] line with the measured numbers. The
// binary exits nonzero if any check fails, so it doubles as a ctest entry.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "holsim/dynamics.hpp"
#include "holsim/memory.hpp"
#include "holsim/model.hpp"
#include "holsim/run.hpp"
#include "holsim/scenario.hpp"
#include "holsim/transport.hpp"
#include "holsim/walks.hpp"

using namespace holsim;
namespace fs = std::filesystem;

namespace {

struct Failure {
    std::string detail;
};

void require(bool ok, const std::string& detail) {
    if (!ok) throw Failure{detail};
}

std::string fmt(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

int worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return std::max(1, std::min(4, static_cast<int>(hw)));
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// ---------------------------------------------------------------------------
// 1. quantum walks spread ballistically, classical walks diffusively

std::string check_walk_scaling() {
    std::vector<std::pair<double, double>> quantum, classical;
    for (int steps : {20, 40, 80, 160}) {
        const double m = static_cast<double>(steps);
        quantum.emplace_back(m, quantum_walk(steps, CoinSpec::hadamard_symmetric()).stddev());
        const double sc = classical_walk(steps).stddev();
        require(std::abs(sc - std::sqrt(m)) <= 1e-12 * sc,
                "classical stddev at " + std::to_string(steps) + " steps is " + fmt(sc) +
                    ", expected sqrt(M) exactly");
        classical.emplace_back(m, sc);
    }
    // fit sigma ~ M^alpha: ballistic alpha -> 1, diffusive alpha -> 1/2
    const double aq = fit_spreading_exponent(quantum).exponent;
    const double ac = fit_spreading_exponent(classical).exponent;
    require(aq >= 0.9, "quantum spreading exponent " + fmt(aq) + " below the ballistic band");
    require(std::abs(ac - 0.5) <= 0.01, "classical spreading exponent " + fmt(ac) + " is not 1/2");
    return "spreading exponents: quantum " + fmt(aq) + ", classical " + fmt(ac) +
           "; classical stddev equals sqrt(M) to machine precision";
}

// ---------------------------------------------------------------------------
// 2. memory estimates double per qubit and invert exactly

std::string check_memory_bound() {
    require(qubit_state_bits(31) == (std::uint64_t{1} << 37),
            "31 qubits should take 2^37 bits");
    require(format_bytes_human(bits_to_bytes(qubit_state_bits(31))) == "16 GiB",
            "2^37 bits should render as 16 GiB");
    for (int n = 0; n <= 57; ++n) {
        require(qubit_state_bits(n) == (std::uint64_t{1} << (n + 6)),
                "state bits at n=" + std::to_string(n) + " are not 2^(n+6)");
        require(max_qubits(qubit_state_bits(n)) == n,
                "max_qubits does not invert the estimate at n=" + std::to_string(n));
    }
    bool guarded = false;
    try {
        qubit_state_bits(64);
    } catch (const ResourceError&) {
        guarded = true;
    }
    require(guarded, "a 64-qubit register should overflow the 64-bit bit counter");
    return "31 qubits = 2^37 bits (16 GiB); inversion exact for n=0..57; overflow guarded";
}

// ---------------------------------------------------------------------------
// 3. vibronic Hamiltonians: separable spectra and the polaron shift

std::string check_hamiltonian() {
    struct Instance {
        SiteNetwork net;
        BathSpec bath;
    };
    std::vector<Instance> instances;
    {
        Instance a;
        a.net.on_site_energies = {0.3, -0.2};
        a.net.couplings = {{0, 1, 0.9}};
        a.bath.modes = {{1.1, 3}};
        a.bath.couplings = Eigen::MatrixXd::Zero(2, 1);
        instances.push_back(std::move(a));
    }
    {
        Instance b;
        b.net.on_site_energies = {0.0, 0.4, -0.3};
        b.net.couplings = {{0, 1, 1.0}, {1, 2, 0.6}};
        b.bath.modes = {{0.9, 2}, {1.7, 1}};
        b.bath.couplings = Eigen::MatrixXd::Zero(3, 2);
        instances.push_back(std::move(b));
    }
    double worst = 0.0;
    for (const Instance& inst : instances) {
        const ProductBasis basis(inst.net.n_sites(), inst.bath.fock_cutoffs());
        const OperatorMatrix total = build_total_hamiltonian(inst.net, inst.bath, basis);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> joint(total.dense());

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> sys(
            build_system_hamiltonian(inst.net).dense());
        std::vector<double> expected;
        std::vector<int> occupation;
        for (Eigen::Index i = 0; i < sys.eigenvalues().size(); ++i) {
            for (std::size_t b = 0; b < basis.bath_dim(); ++b) {
                int site = 0;
                basis.decode(b, site, occupation);  // flat index b lives on site 0
                double vib = 0.0;
                for (std::size_t m = 0; m < inst.bath.modes.size(); ++m) {
                    vib += inst.bath.modes[m].frequency * occupation[m];
                }
                expected.push_back(sys.eigenvalues()(i) + vib);
            }
        }
        std::sort(expected.begin(), expected.end());
        for (std::size_t k = 0; k < expected.size(); ++k) {
            worst = std::max(worst, std::abs(joint.eigenvalues()(static_cast<Eigen::Index>(k)) -
                                             expected[k]));
        }
    }
    require(worst <= 1e-9, "separable spectrum deviates by " + fmt(worst));

    // one site, one mode: exact displaced-oscillator ground state e - g^2/nu
    SiteNetwork single;
    single.on_site_energies = {0.7};
    BathSpec bath;
    bath.modes = {{1.3, 40}};
    bath.couplings = Eigen::MatrixXd::Constant(1, 1, 0.5);
    const ProductBasis basis(1, bath.fock_cutoffs());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
        build_total_hamiltonian(single, bath, basis).dense());
    const double polaron = solver.eigenvalues()(0);
    const double exact = 0.7 - 0.25 / 1.3;
    require(std::abs(polaron - exact) <= 1e-6,
            "polaron ground energy " + fmt(polaron) + " vs exact " + fmt(exact));
    return "separable joint spectra match to " + fmt(worst) + "; polaron shift within " +
           fmt(std::abs(polaron - exact));
}

// ---------------------------------------------------------------------------
// 4. propagation against independent oracles

std::string check_dynamics_oracles() {
    // (a) resonant dimer Rabi flop: P1(pi/2) = 1
    SiteNetwork dimer;
    dimer.on_site_energies = {0.0, 0.0};
    dimer.couplings = {{0, 1, 1.0}};
    const OperatorMatrix h2 = build_system_hamiltonian(dimer);
    IntegratorConfig cfg;
    cfg.dt = std::acos(-1.0) / 2.0 / 100.0;
    cfg.t_total = std::acos(-1.0) / 2.0;
    const Trajectory rabi = evolve_unitary(h2, PureState::basis_state(2, 0), cfg);
    const double p1 = rabi.last().populations[1];
    require(std::abs(p1 - 1.0) <= 1e-8, "Rabi transfer reached " + fmt(p1));

    // (b) vibronic 8-level system vs a Pade matrix exponential
    SiteNetwork net;
    net.on_site_energies = {0.3, -0.2};
    net.couplings = {{0, 1, 0.9}};
    BathSpec bath;
    bath.modes = {{1.1, 3}};
    bath.couplings = Eigen::MatrixXd::Constant(2, 1, 0.37);
    const ProductBasis basis(2, bath.fock_cutoffs());
    const OperatorMatrix h = build_total_hamiltonian(net, bath, basis);
    IntegratorConfig joint_cfg;
    joint_cfg.dt = 0.01;
    joint_cfg.t_total = 3.0;
    joint_cfg.record_snapshots = true;
    const Trajectory traj =
        evolve_unitary(h, PureState::basis_state(8, 0), joint_cfg, StateLayout{2, 4});
    const Eigen::MatrixXcd hd = h.dense();
    const Eigen::MatrixXcd u = (Eigen::MatrixXcd(std::complex<double>(0.0, -3.0) * hd)).exp();
    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(8);
    psi0(0) = 1.0;
    const Eigen::VectorXcd reference = u * psi0;
    const double expm_err = (*traj.last().state_snapshot - reference).norm();
    require(expm_err <= 1e-8, "joint-basis propagation differs from the matrix exponential by " +
                                  fmt(expm_err));

    // (c) the open-system integrator with no channels reproduces unitary motion
    IntegratorConfig open_cfg;
    open_cfg.dt = 0.002;
    open_cfg.t_total = 2.0;
    const Trajectory closed = evolve_open(h2, ChannelSpec{}, DensityMatrix::site_localized(2, 0),
                                          open_cfg);
    const Trajectory unitary = evolve_unitary(h2, PureState::basis_state(2, 0), open_cfg);
    double pop_err = 0.0;
    for (std::size_t k = 0; k < closed.records.size(); ++k) {
        pop_err = std::max(pop_err, std::abs(closed.records[k].populations[0] -
                                             unitary.records[k].populations[0]));
    }
    require(pop_err <= 1e-8, "channel-free Lindblad deviates from unitary by " + fmt(pop_err));

    // (d) pure dephasing decays coherence as exp(-gamma t) with frozen populations
    SiteNetwork frozen;
    frozen.on_site_energies = {0.0, 0.0};
    ChannelSpec channels;
    channels.dephasing_rates = {0.7, 0.0};
    Eigen::VectorXcd plus(2);
    plus << std::sqrt(0.5), std::sqrt(0.5);
    IntegratorConfig deph_cfg;
    deph_cfg.dt = 0.001;
    deph_cfg.t_total = 2.0;
    const Trajectory dephased = evolve_open(build_system_hamiltonian(frozen), channels,
                                            DensityMatrix::from_pure(plus), deph_cfg);
    const double expected = std::exp(-0.7 * 2.0 / 2.0);  // rate (0.7+0)/2 on the off-diagonal
    const double coherence = dephased.last().coherence_l1;
    require(std::abs(coherence - expected) <= 1e-6,
            "dephasing decay " + fmt(coherence) + " vs analytic " + fmt(expected));
    return "Rabi 1e-8; matrix-exponential cross-check " + fmt(expm_err) +
           "; channel-free Lindblad " + fmt(pop_err) + "; dephasing analytic " +
           fmt(std::abs(coherence - expected));
}

// ---------------------------------------------------------------------------
// 5. conservation laws and positivity diagnostics

std::string check_conservation() {
    SiteNetwork net7 = generate_disordered_network(
        7, Topology::Chain, Distribution::normal(0.0, 0.5), Distribution::constant(1.0), 42);
    const OperatorMatrix h7 = build_system_hamiltonian(net7);
    IntegratorConfig cfg;
    cfg.dt = 0.05;
    cfg.t_total = 50.0;
    const Trajectory unitary = evolve_unitary(h7, PureState::basis_state(7, 0), cfg);
    require(unitary.max_norm_drift <= 1e-9,
            "norm drift " + fmt(unitary.max_norm_drift) + " over t=50");
    require(unitary.max_energy_drift <= 1e-7,
            "energy drift " + fmt(unitary.max_energy_drift) + " over t=50");

    ChannelSpec channels;
    channels.dephasing_rates.assign(7, 0.5);
    IntegratorConfig open_cfg;
    open_cfg.dt = 0.01;
    open_cfg.t_total = 10.0;
    const Trajectory open_run =
        evolve_open(h7, channels, DensityMatrix::site_localized(7, 0), open_cfg);
    require(std::abs(open_run.records.back().trace - 1.0) <= 1e-9 &&
                open_run.max_norm_drift <= 1e-9,
            "trace drift " + fmt(open_run.max_norm_drift) + " without a sink");
    require(open_run.min_eigenvalue >= -1e-8,
            "density matrix eigenvalue dipped to " + fmt(open_run.min_eigenvalue));
    require(open_run.max_hermiticity_defect <= 1e-10,
            "hermiticity defect " + fmt(open_run.max_hermiticity_defect));
    return "unitary norm drift " + fmt(unitary.max_norm_drift) + ", energy drift " +
           fmt(unitary.max_energy_drift) + "; open-system trace drift " +
           fmt(open_run.max_norm_drift) + ", min eigenvalue " + fmt(open_run.min_eigenvalue);
}

// ---------------------------------------------------------------------------
// 6. dephasing-assisted transport peaks at intermediate noise

std::string check_noise_assisted_transport() {
    SiteNetwork net;
    net.on_site_energies = {0.0, 10.0};
    net.couplings = {{0, 1, 1.0}};
    OpenSystemProblem problem;
    problem.h_system = build_system_hamiltonian(net);
    problem.channels.sink = Sink{1, 1.0};
    problem.rho0 = DensityMatrix::site_localized(2, 0);
    problem.integrator.dt = 0.01;
    problem.integrator.t_total = 50.0;
    problem.integrator.record_stride = 10;

    const std::vector<double> grid = log_grid(1e-2, 1e3, 11);
    const EfficiencyCurve curve = sweep_dephasing(problem, grid, worker_count());
    const auto best = std::max_element(
        curve.points.begin(), curve.points.end(),
        [](const EfficiencyPoint& a, const EfficiencyPoint& b) { return a.eta < b.eta; });
    const double eta_lo = curve.points.front().eta;
    const double eta_hi = curve.points.back().eta;
    const bool interior = best != curve.points.begin() && best != curve.points.end() - 1;
    require(interior, "efficiency peaks at a grid endpoint");
    require(best->eta >= 1.1 * eta_lo && best->eta >= 1.1 * eta_hi,
            "peak " + fmt(best->eta) + " does not dominate endpoints " + fmt(eta_lo) + ", " +
                fmt(eta_hi));
    // the curve is a deterministic function of its inputs
    const EfficiencyCurve rerun = sweep_dephasing(problem, grid, 1);
    require(sweep_csv(curve) == sweep_csv(rerun),
            "sweep bytes differ between parallel and serial runs");
    return "peak eta " + fmt(best->eta) + " at gamma " + fmt(best->parameter) +
           " vs endpoints " + fmt(eta_lo) + " / " + fmt(eta_hi) + "; parallel == serial bytes";
}

// ---------------------------------------------------------------------------
// 7. the ballistic-to-diffusive crossover on a 41-site chain

std::string check_crossover() {
    OpenSystemProblem problem;
    SiteNetwork chain = generate_disordered_network(
        41, Topology::Chain, Distribution::constant(0.0), Distribution::constant(1.0), 1);
    problem.h_system = build_system_hamiltonian(chain);
    problem.rho0 = DensityMatrix::site_localized(41, 20);
    problem.integrator.dt = 0.004;
    problem.integrator.t_total = 4.5;

    const std::vector<double> gammas{0.0, 0.5, 2.0, 10.0, 100.0};
    const CrossoverReport report = crossover_scan(problem, gammas, {}, worker_count());
    const double a0 = report.points.front().alpha;
    const double a_hi = report.points.back().alpha;
    require(a0 >= 0.95, "coherent exponent " + fmt(a0) + " below the ballistic band");
    require(a_hi <= 0.6, "strong-noise exponent " + fmt(a_hi) + " above the diffusive band");
    for (std::size_t k = 0; k + 1 < report.points.size(); ++k) {
        const double slack = 3.0 * (report.points[k].alpha_std_error +
                                    report.points[k + 1].alpha_std_error) +
                             1e-9;
        require(report.points[k + 1].alpha <= report.points[k].alpha + slack,
                "exponent rises from " + fmt(report.points[k].alpha) + " to " +
                    fmt(report.points[k + 1].alpha) + " at gamma " +
                    fmt(report.points[k + 1].gamma));
    }
    std::string alphas;
    for (const CrossoverPoint& p : report.points) {
        if (!alphas.empty()) alphas += ", ";
        alphas += fmt(p.alpha);
    }
    return "alpha(gamma) = [" + alphas + "] monotone from ballistic to diffusive";
}

// ---------------------------------------------------------------------------
// 8. artifacts are byte-identical across reruns and worker counts

std::string check_determinism() {
    const fs::path base = fs::temp_directory_path() / "holsim_acceptance";
    fs::remove_all(base);
    Scenario scenario = preset_scenario("dimer-detuned");
    scenario.integrator.t_total = 10.0;
    RunOptions options;
    options.directory_override = (base / "first").string();
    const RunResult first = run_simulate(scenario, options);
    options.directory_override = (base / "second").string();
    const RunResult second = run_simulate(scenario, options);
    for (const char* name : {"scenario.json", "trajectory.csv"}) {
        require(read_file(first.directory / name) == read_file(second.directory / name),
                std::string(name) + " differs between identical runs");
    }
    require(first.input_hash == second.input_hash, "input hashes differ between identical runs");

    OpenSystemProblem problem;
    problem.h_system = build_system_hamiltonian(scenario.realize_network());
    problem.channels = scenario.realize_channels(2);
    problem.rho0 = DensityMatrix::site_localized(2, 0);
    problem.integrator = scenario.integrator;
    const std::vector<double> grid{0.3, 3.0, 30.0};
    const std::string serial = sweep_csv(sweep_dephasing(problem, grid, 1));
    const std::string parallel = sweep_csv(sweep_dephasing(problem, grid, 2));
    require(serial == parallel, "sweep bytes depend on the worker count");
    fs::remove_all(base);
    return "re-run artifacts and 1- vs 2-worker sweeps are byte-identical";
}

// ---------------------------------------------------------------------------
// 9. spectral-density discretization conserves the reorganization energy

std::string check_spectral_discretization() {
    SpectralDensitySpec spec;
    spec.family = SpectralFamily::OhmicExponentialCutoff;
    spec.coupling_scale = 0.4;
    spec.cutoff = 2.0;
    spec.band_lo = 0.05;
    spec.band_hi = 12.0;
    spec.n_modes = 256;
    spec.fock_cutoff = 1;
    const BathSpec bath = discretize_spectral_density(spec, 1);
    double discrete = 0.0;
    for (std::size_t k = 0; k < bath.modes.size(); ++k) {
        const double g = bath.couplings(0, static_cast<Eigen::Index>(k));
        discrete += g * g / bath.modes[k].frequency;
    }
    const double exact = 0.4 * 2.0 * (std::exp(-0.05 / 2.0) - std::exp(-12.0 / 2.0));
    const double rel = std::abs(discrete - exact) / exact;
    require(rel <= 0.01, "reorganization energy off by " + fmt(100.0 * rel) + "%");
    return "256-mode reorganization energy within " + fmt(100.0 * rel) + "% of analytic";
}

struct Criterion {
    const char* name;
    std::function<std::string()> body;
    double budget_seconds;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"ballistic vs diffusive walk scaling", check_walk_scaling, 10.0},
        {"qubit memory bound", check_memory_bound, 10.0},
        {"vibronic Hamiltonian spectra", check_hamiltonian, 30.0},
        {"propagation oracles", check_dynamics_oracles, 60.0},
        {"conservation and positivity", check_conservation, 60.0},
        {"noise-assisted transport", check_noise_assisted_transport, 60.0},
        {"transport crossover", check_crossover, 300.0},
        {"deterministic artifacts", check_determinism, 60.0},
        {"spectral discretization", check_spectral_discretization, 10.0},
    };

    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        std::string verdict = "PASS";
        std::string detail;
        try {
            detail = criteria[k].body();
        } catch (const Failure& failure) {
            verdict = "FAIL";
            detail = failure.detail;
        } catch (const std::exception& err) {
            verdict = "FAIL";
            detail = std::string("unexpected error: ") + err.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (verdict == "PASS" && elapsed > criteria[k].budget_seconds) {
            verdict = "FAIL";
            detail = "exceeded the " + fmt(criteria[k].budget_seconds) + "s budget (" +
                     fmt(elapsed) + "s); " + detail;
        }
        std::printf("[%s] %zu. %s: %s (%.2fs)\n", verdict.c_str(), k + 1, criteria[k].name,
                    detail.c_str(), elapsed);
        failures += verdict == "FAIL";
    }
    return failures == 0 ? 0 : 1;
}
