#include "holsim/run.hpp"

#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>

#include "holsim/csv.hpp"
#include "holsim/errors.hpp"
#include "holsim/memory.hpp"
#include "holsim/version.hpp"

namespace holsim {

namespace {

using nlohmann::json;

struct TimedRun {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::filesystem::path resolve_directory(const RunOptions& options, const std::string& scenario_dir,
                                        const std::string& name, const std::string& hash) {
    if (!options.directory_override.empty()) return options.directory_override;
    if (!scenario_dir.empty()) return scenario_dir;
    return std::filesystem::path(options.out_root) / (name + "-" + hash.substr(0, 8));
}

void prepare_directory(const std::filesystem::path& dir, bool force) {
    try {
        if (std::filesystem::exists(dir) && !std::filesystem::is_empty(dir) && !force) {
            throw IoError("output directory '" + dir.string() +
                          "' already contains files; pass --force to overwrite");
        }
        std::filesystem::create_directories(dir);
    } catch (const std::filesystem::filesystem_error& err) {
        throw IoError(std::string("cannot prepare output directory: ") + err.what());
    }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

/// Accumulates artifacts, then writes the manifest that describes them.
class ArtifactSink {
public:
    ArtifactSink(std::filesystem::path dir, std::string command, std::string input_hash)
        : dir_(std::move(dir)), command_(std::move(command)), input_hash_(std::move(input_hash)) {}

    void add(const std::string& name, const std::string& content, std::size_t rows) {
        write_file(dir_ / name, content);
        json entry;
        entry["file"] = name;
        entry["bytes"] = content.size();
        entry["rows"] = rows;
        entry["fnv1a64"] = hex_digest(fnv1a64(content));
        outputs_.push_back(std::move(entry));
        names_.push_back(name);
    }

    RunResult finish(const json& inputs, double wall_seconds, int jobs,
                     const std::vector<std::string>& warnings = {}) {
        json manifest;
        manifest["manifest_version"] = kManifestVersion;
        manifest["tool"] = json{{"name", kToolName}, {"version", kToolVersion}};
        manifest["command"] = command_;
        manifest["input_hash"] = input_hash_;
        manifest["inputs"] = inputs;
        manifest["jobs"] = jobs;
        manifest["outputs"] = outputs_;
        manifest["wall_time_seconds"] = wall_seconds;
        if (!warnings.empty()) manifest["warnings"] = warnings;
        write_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
        names_.push_back("manifest.json");
        return RunResult{dir_, std::move(names_), input_hash_};
    }

private:
    std::filesystem::path dir_;
    std::string command_;
    std::string input_hash_;
    json outputs_ = json::array();
    std::vector<std::string> names_;
};

std::string hash_inputs(const std::string& command, const json& inputs) {
    return hex_digest(fnv1a64(command + "\n" + inputs.dump()));
}

json grid_to_json(std::span<const double> grid) {
    json arr = json::array();
    for (double g : grid) arr.push_back(g);
    return arr;
}

DensityMatrix initial_density(const Scenario& scenario, int n_sites) {
    if (scenario.initial_state.site) {
        return DensityMatrix::site_localized(n_sites, *scenario.initial_state.site);
    }
    Eigen::VectorXcd amps(n_sites);
    for (int i = 0; i < n_sites; ++i) {
        amps(i) = scenario.initial_state.amplitudes[static_cast<std::size_t>(i)];
    }
    return DensityMatrix::from_pure(amps);
}

int default_msd_origin(const Scenario& scenario, int n_sites) {
    if (scenario.observables.msd && scenario.observables.msd->origin_site >= 0) {
        return scenario.observables.msd->origin_site;
    }
    if (scenario.initial_state.site) return *scenario.initial_state.site;
    int best = 0;
    double top = -1.0;
    for (int i = 0; i < n_sites; ++i) {
        const double p = std::norm(scenario.initial_state.amplitudes[static_cast<std::size_t>(i)]);
        if (p > top) {
            top = p;
            best = i;
        }
    }
    return best;
}

std::vector<double> msd_positions(const Scenario& scenario, int n_sites) {
    if (scenario.observables.msd && !scenario.observables.msd->positions.empty()) {
        return scenario.observables.msd->positions;
    }
    std::vector<double> coords(static_cast<std::size_t>(n_sites));
    for (int i = 0; i < n_sites; ++i) coords[static_cast<std::size_t>(i)] = static_cast<double>(i);
    return coords;
}

std::string snapshots_csv(const Trajectory& traj) {
    if (!traj.records.empty() && traj.records.front().rho_snapshot.has_value()) {
        CsvWriter csv({"t", "row", "col", "re", "im"});
        for (const auto& rec : traj.records) {
            const Eigen::MatrixXcd& rho = *rec.rho_snapshot;
            for (Eigen::Index r = 0; r < rho.rows(); ++r) {
                for (Eigen::Index c = 0; c < rho.cols(); ++c) {
                    csv.row({format_double(rec.t), format_int(r), format_int(c),
                             format_double(rho(r, c).real()), format_double(rho(r, c).imag())});
                }
            }
        }
        return csv.text();
    }
    CsvWriter csv({"t", "index", "re", "im"});
    for (const auto& rec : traj.records) {
        if (!rec.state_snapshot) continue;
        const Eigen::VectorXcd& psi = *rec.state_snapshot;
        for (Eigen::Index i = 0; i < psi.size(); ++i) {
            csv.row({format_double(rec.t), format_int(i), format_double(psi(i).real()),
                     format_double(psi(i).imag())});
        }
    }
    return csv.text();
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string hex_digest(std::uint64_t value) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::vector<std::string> header;
    header.emplace_back("t");
    for (int i = 0; i < traj.n_sites; ++i) header.push_back("pop_" + std::to_string(i));
    header.emplace_back("l1_coherence");
    header.emplace_back("trace");
    header.emplace_back("sink_captured");
    CsvWriter csv(std::move(header));
    std::vector<double> cells;
    for (const auto& rec : traj.records) {
        cells.clear();
        cells.push_back(rec.t);
        cells.insert(cells.end(), rec.populations.begin(), rec.populations.end());
        cells.push_back(rec.coherence_l1);
        cells.push_back(rec.trace);
        cells.push_back(rec.sink_captured);
        csv.numeric_row(cells);
    }
    return csv.text();
}

std::string sweep_csv(const EfficiencyCurve& curve) {
    CsvWriter csv({"gamma", "eta", "t50"});
    for (const auto& point : curve.points) {
        csv.numeric_row(std::array{point.parameter, point.eta, point.t50});
    }
    return csv.text();
}

std::string crossover_csv(const CrossoverReport& report) {
    CsvWriter csv({"gamma", "alpha", "residual"});
    for (const auto& point : report.points) {
        csv.numeric_row(std::array{point.gamma, point.alpha, point.residual});
    }
    return csv.text();
}

std::string walk_csv(const WalkDistribution& dist) {
    CsvWriter csv({"position", "probability", "steps", "stddev"});
    const std::string steps = format_int(dist.steps);
    const std::string stddev = format_double(dist.stddev());
    for (int pos = -dist.steps; pos <= dist.steps; ++pos) {
        csv.row({format_int(pos), format_double(dist.probability_at(pos)), steps, stddev});
    }
    return csv.text();
}

std::string msd_csv(std::span<const MsdPoint> points) {
    CsvWriter csv({"t", "msd"});
    for (const auto& point : points) {
        csv.numeric_row(std::array{point.t, point.msd});
    }
    return csv.text();
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (n < 2) throw ValidationError("log grid needs at least 2 points");
    if (!(lo > 0.0) || !(hi > lo)) {
        throw ValidationError("log grid requires 0 < lo < hi");
    }
    std::vector<double> grid(static_cast<std::size_t>(n));
    const double step = (std::log(hi) - std::log(lo)) / (n - 1);
    for (int i = 0; i < n; ++i) {
        grid[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + step * i);
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

RunResult run_simulate(const Scenario& scenario, const RunOptions& options) {
    TimedRun timer;
    const json inputs = scenario_to_json(scenario);
    const std::string hash = hash_inputs("simulate", inputs);
    const std::filesystem::path dir =
        resolve_directory(options, scenario.output.directory, scenario.name, hash);
    prepare_directory(dir, options.force);

    const SiteNetwork net = scenario.realize_network();
    const int n = net.n_sites();

    Trajectory traj;
    if (scenario.bath) {
        const BathSpec bath = scenario.realize_bath(n);
        const ProductBasis basis(n, bath.fock_cutoffs());
        const OperatorMatrix h = build_total_hamiltonian(net, bath, basis);
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.total_dim()));
        if (scenario.initial_state.site) {
            psi(static_cast<Eigen::Index>(*scenario.initial_state.site) *
                static_cast<Eigen::Index>(basis.bath_dim())) = 1.0;
        } else {
            for (int i = 0; i < n; ++i) {
                psi(static_cast<Eigen::Index>(i) * static_cast<Eigen::Index>(basis.bath_dim())) =
                    scenario.initial_state.amplitudes[static_cast<std::size_t>(i)];
            }
        }
        IntegratorConfig cfg = scenario.integrator;
        cfg.record_snapshots = scenario.output.snapshots;
        traj = evolve_unitary(h, PureState{std::move(psi)}, cfg,
                              StateLayout{n, basis.bath_dim()});
    } else {
        const OperatorMatrix h = build_system_hamiltonian(net);
        const ChannelSpec channels = scenario.realize_channels(n);
        IntegratorConfig cfg = scenario.integrator;
        cfg.record_snapshots = scenario.output.snapshots;
        traj = evolve_open(h, channels, initial_density(scenario, n), cfg);
    }

    ArtifactSink sink(dir, "simulate", hash);
    sink.add("scenario.json", serialize_scenario(scenario), 0);
    sink.add("trajectory.csv", trajectory_csv(traj), traj.records.size());
    if (scenario.observables.msd) {
        const auto msd = mean_squared_displacement(traj, default_msd_origin(scenario, n),
                                                   msd_positions(scenario, n));
        sink.add("msd.csv", msd_csv(msd), msd.size());
    }
    if (scenario.output.snapshots) {
        sink.add("snapshots.csv", snapshots_csv(traj), traj.records.size());
    }
    return sink.finish(inputs, timer.seconds(), 1);
}

RunResult run_sweep_dephasing(const Scenario& scenario, std::span<const double> gamma_grid,
                              const RunOptions& options) {
    TimedRun timer;
    json inputs;
    inputs["scenario"] = scenario_to_json(scenario);
    inputs["gamma_grid"] = grid_to_json(gamma_grid);
    const std::string hash = hash_inputs("sweep-dephasing", inputs);
    const std::filesystem::path dir =
        resolve_directory(options, scenario.output.directory, scenario.name, hash);
    prepare_directory(dir, options.force);

    if (scenario.bath) {
        throw ValidationError("sweep-dephasing runs on the reduced site space; remove the bath "
                              "block or use simulate");
    }
    const SiteNetwork net = scenario.realize_network();
    const int n = net.n_sites();
    OpenSystemProblem problem{build_system_hamiltonian(net), scenario.realize_channels(n),
                              initial_density(scenario, n), scenario.integrator};
    const EfficiencyCurve curve = sweep_dephasing(problem, gamma_grid, options.jobs);

    ArtifactSink sink(dir, "sweep-dephasing", hash);
    sink.add("scenario.json", serialize_scenario(scenario), 0);
    sink.add("sweep.csv", sweep_csv(curve), curve.points.size());
    return sink.finish(inputs, timer.seconds(), options.jobs);
}

RunResult run_crossover(const Scenario& scenario, std::span<const double> gamma_grid,
                        const RunOptions& options) {
    TimedRun timer;
    json inputs;
    inputs["scenario"] = scenario_to_json(scenario);
    inputs["gamma_grid"] = grid_to_json(gamma_grid);
    const std::string hash = hash_inputs("crossover", inputs);
    const std::filesystem::path dir =
        resolve_directory(options, scenario.output.directory, scenario.name, hash);
    prepare_directory(dir, options.force);

    if (scenario.bath) {
        throw ValidationError("crossover runs on the reduced site space; remove the bath block");
    }
    const SiteNetwork net = scenario.realize_network();
    const int n = net.n_sites();
    OpenSystemProblem problem{build_system_hamiltonian(net), scenario.realize_channels(n),
                              initial_density(scenario, n), scenario.integrator};
    CrossoverSettings settings;
    settings.origin_site = default_msd_origin(scenario, n);
    settings.positions = msd_positions(scenario, n);
    const CrossoverReport report = crossover_scan(problem, gamma_grid, settings, options.jobs);

    ArtifactSink sink(dir, "crossover", hash);
    sink.add("scenario.json", serialize_scenario(scenario), 0);
    sink.add("crossover.csv", crossover_csv(report), report.points.size());
    return sink.finish(inputs, timer.seconds(), options.jobs, report.warnings);
}

const char* walk_kind_name(WalkKind kind) {
    switch (kind) {
        case WalkKind::Classical: return "classical";
        case WalkKind::Quantum: return "quantum";
        case WalkKind::Both: return "both";
    }
    return "unknown";
}

std::optional<WalkKind> walk_kind_from_name(const std::string& name) {
    if (name == "classical") return WalkKind::Classical;
    if (name == "quantum") return WalkKind::Quantum;
    if (name == "both") return WalkKind::Both;
    return std::nullopt;
}

RunResult run_walk(const WalkRunConfig& config, const RunOptions& options) {
    TimedRun timer;
    if (config.steps < 1) throw ValidationError("walk steps must be >= 1");
    json inputs;
    inputs["steps"] = config.steps;
    inputs["kind"] = walk_kind_name(config.kind);
    inputs["symmetric_coin"] = config.symmetric_coin;
    const std::string hash = hash_inputs("walk", inputs);
    const std::filesystem::path dir = resolve_directory(options, "", config.name, hash);
    prepare_directory(dir, options.force);

    ArtifactSink sink(dir, "walk", hash);
    if (config.kind == WalkKind::Classical || config.kind == WalkKind::Both) {
        const WalkDistribution dist = classical_walk(config.steps);
        sink.add("walk_classical.csv", walk_csv(dist), dist.probabilities.size());
    }
    if (config.kind == WalkKind::Quantum || config.kind == WalkKind::Both) {
        const CoinSpec coin =
            config.symmetric_coin ? CoinSpec::hadamard_symmetric() : CoinSpec::hadamard();
        const WalkDistribution dist = quantum_walk(config.steps, coin);
        sink.add("walk_quantum.csv", walk_csv(dist), dist.probabilities.size());
    }
    return sink.finish(inputs, timer.seconds(), 1);
}

std::string MemoryReport::render() const {
    std::string out;
    if (qubits) {
        out += "qubits: " + std::to_string(*qubits) + "\n";
        const std::uint64_t bits = *state_bits;
        out += "state bits: " + std::to_string(bits);
        if (bits != 0 && (bits & (bits - 1)) == 0) {
            out += " (= 2^" + std::to_string(std::countr_zero(bits)) + ")";
        }
        out += "\n";
        out += "state bytes: " + std::to_string(*state_bytes) + " (" +
               format_bytes_human(*state_bytes) + ")\n";
    }
    if (budget_bits) {
        out += "budget bits: " + std::to_string(*budget_bits) + "\n";
        out += "max qubits: " + std::to_string(*budget_qubits) + "\n";
    }
    return out;
}

MemoryReport memory_report(std::optional<int> qubits, std::optional<std::uint64_t> budget_bits) {
    if (!qubits && !budget_bits) {
        throw ValidationError("memory: provide --qubits and/or --budget-bits");
    }
    MemoryReport report;
    if (qubits) {
        report.qubits = qubits;
        report.state_bits = qubit_state_bits(*qubits);
        report.state_bytes = bits_to_bytes(*report.state_bits);
    }
    if (budget_bits) {
        report.budget_bits = budget_bits;
        report.budget_qubits = max_qubits(*budget_bits);
    }
    return report;
}

}  // namespace holsim
