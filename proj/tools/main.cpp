// holsim CLI: scenario-driven experiments with deterministic CSV artifacts.
//
//   holsim preset dimer > dimer.json
//   holsim simulate dimer.json
//   holsim sweep-dephasing detuned.json --gamma-min 0.01 --gamma-max 1000 --points 25
//   holsim crossover chain41.json --gamma-list 0,0.5,2,10,100 --jobs 4
//   holsim walk --steps 100 --kind both
//   holsim memory --qubits 31
//
// Exit codes: 0 ok, 2 validation, 3 integrator, 4 I/O, 5 resource.
// Failures print one machine-readable JSON object to stderr.

#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "holsim/errors.hpp"
#include "holsim/run.hpp"
#include "holsim/scenario.hpp"
#include "holsim/version.hpp"

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw holsim::IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw holsim::IoError("read failure on '" + path + "'");
    return buf.str();
}

std::vector<double> parse_gamma_list(const std::string& text) {
    std::vector<double> grid;
    std::stringstream stream(text);
    std::string token;
    while (std::getline(stream, token, ',')) {
        try {
            std::size_t used = 0;
            const double value = std::stod(token, &used);
            while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) ++used;
            if (used != token.size()) throw std::invalid_argument(token);
            grid.push_back(value);
        } catch (const std::exception&) {
            throw holsim::ValidationError("--gamma-list: cannot parse '" + token + "' as a number");
        }
    }
    if (grid.empty()) throw holsim::ValidationError("--gamma-list is empty");
    return grid;
}

int report_error(const holsim::Error& err) {
    nlohmann::json doc;
    doc["error"] = {{"category", err.category_name()},
                    {"exit_code", err.exit_code()},
                    {"message", err.what()}};
    if (const auto* scenario_err = dynamic_cast<const holsim::ScenarioValidationError*>(&err)) {
        nlohmann::json issues = nlohmann::json::array();
        for (const auto& issue : scenario_err->issues()) {
            issues.push_back({{"path", issue.path}, {"message", issue.message}});
        }
        doc["error"]["issues"] = std::move(issues);
    }
    std::cerr << doc.dump() << "\n";
    return err.exit_code();
}

void announce(const holsim::RunResult& result) {
    std::cout << "wrote " << result.files.size() << " files to " << result.directory.string()
              << " (input hash " << result.input_hash << ")\n";
}

struct GammaGridFlags {
    double lo = 1e-2;
    double hi = 1e3;
    int points = 25;
    std::string list;

    // CLI grid resolution: an explicit list wins over the log-grid knobs.
    std::vector<double> resolve(const std::vector<double>& fallback = {}) const {
        if (!list.empty()) return parse_gamma_list(list);
        if (!fallback.empty()) return fallback;
        return holsim::log_grid(lo, hi, points);
    }
};

void add_gamma_flags(CLI::App* cmd, GammaGridFlags& flags, bool log_default) {
    cmd->add_option("--gamma-list", flags.list,
                    "comma-separated dephasing rates (overrides the log grid)");
    if (log_default) {
        cmd->add_option("--gamma-min", flags.lo, "log-grid start")->check(CLI::PositiveNumber);
        cmd->add_option("--gamma-max", flags.hi, "log-grid end")->check(CLI::PositiveNumber);
        cmd->add_option("--points", flags.points, "log-grid size")->check(CLI::Range(2, 10000));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"holsim: tight-binding transport with bosonic baths, Markovian channels, "
                 "and random-walk baselines"};
    app.set_version_flag("--version", std::string(holsim::kToolName) + " " + holsim::kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();  // let --jobs/--out/--force appear after the subcommand too

    holsim::RunOptions run_options;
    app.add_option("--out-root", run_options.out_root,
                   "root for auto-named output directories (default: out)")
        ->envname("HOLSIM_OUT_ROOT");
    app.add_option("--jobs", run_options.jobs, "worker threads for sweeps (default: 1)")
        ->envname("HOLSIM_JOBS")
        ->check(CLI::Range(1, 1024));
    app.add_flag("--force", run_options.force, "overwrite a non-empty output directory");
    app.add_option("--out", run_options.directory_override,
                   "exact output directory (overrides the scenario and --out-root)");

    std::string scenario_path;
    auto* simulate = app.add_subcommand("simulate", "propagate one scenario and write trajectory.csv");
    simulate->add_option("scenario", scenario_path, "scenario JSON file")->required();

    GammaGridFlags sweep_gammas;
    auto* sweep = app.add_subcommand(
        "sweep-dephasing", "transfer efficiency across a dephasing-rate grid (writes sweep.csv)");
    sweep->add_option("scenario", scenario_path, "scenario JSON file")->required();
    add_gamma_flags(sweep, sweep_gammas, true);

    GammaGridFlags crossover_gammas;
    auto* crossover = app.add_subcommand(
        "crossover", "spreading-exponent scan across dephasing rates (writes crossover.csv)");
    crossover->add_option("scenario", scenario_path, "scenario JSON file")->required();
    add_gamma_flags(crossover, crossover_gammas, false);

    holsim::WalkRunConfig walk_config;
    std::string walk_kind = "both";
    auto* walk = app.add_subcommand("walk", "classical and coined-quantum walk distributions");
    walk->add_option("--steps", walk_config.steps, "number of steps M (default: 100)")
        ->check(CLI::Range(1, 1000000));
    walk->add_option("--kind", walk_kind, "classical | quantum | both (default: both)");
    walk->add_flag("--symmetric-coin", walk_config.symmetric_coin,
                   "start the quantum walk from the symmetric coin state");
    walk->add_option("--name", walk_config.name, "output directory stem (default: walk)");

    int memory_qubits = -1;
    std::uint64_t memory_budget = 0;
    auto* memory = app.add_subcommand("memory", "classical bits needed for dense state storage");
    auto* qubits_opt = memory->add_option("--qubits", memory_qubits, "register size n")
                           ->check(CLI::Range(0, 1000));
    auto* budget_opt =
        memory->add_option("--budget-bits", memory_budget, "bit budget to invert into max qubits");

    std::string preset_name;
    std::string preset_output;
    bool preset_list = false;
    auto* preset = app.add_subcommand("preset", "emit a built-in scenario document");
    preset->add_option("name", preset_name, "preset name");
    preset->add_flag("--list", preset_list, "list available presets");
    preset->add_option("--output", preset_output, "write to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) {
            announce(holsim::run_simulate(holsim::parse_scenario(read_text_file(scenario_path)),
                                          run_options));
        } else if (sweep->parsed()) {
            const auto scenario = holsim::parse_scenario(read_text_file(scenario_path));
            announce(holsim::run_sweep_dephasing(scenario, sweep_gammas.resolve(), run_options));
        } else if (crossover->parsed()) {
            const auto scenario = holsim::parse_scenario(read_text_file(scenario_path));
            static const std::vector<double> kDefaultCrossoverGrid = {0.0, 0.5, 2.0, 10.0, 100.0};
            announce(holsim::run_crossover(scenario, crossover_gammas.resolve(kDefaultCrossoverGrid),
                                           run_options));
        } else if (walk->parsed()) {
            const auto kind = holsim::walk_kind_from_name(walk_kind);
            if (!kind) {
                throw holsim::ValidationError("--kind must be classical, quantum, or both; got '" +
                                              walk_kind + "'");
            }
            walk_config.kind = *kind;
            announce(holsim::run_walk(walk_config, run_options));
        } else if (memory->parsed()) {
            const auto report = holsim::memory_report(
                qubits_opt->count() ? std::optional<int>(memory_qubits) : std::nullopt,
                budget_opt->count() ? std::optional<std::uint64_t>(memory_budget) : std::nullopt);
            std::cout << report.render();
        } else if (preset->parsed()) {
            if (preset_list) {
                for (const auto& name : holsim::preset_names()) std::cout << name << "\n";
                return 0;
            }
            if (preset_name.empty()) {
                throw holsim::ValidationError("preset: give a name or --list");
            }
            const std::string text = holsim::serialize_scenario(holsim::preset_scenario(preset_name));
            if (preset_output.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(preset_output, std::ios::binary | std::ios::trunc);
                if (!out) throw holsim::IoError("cannot open '" + preset_output + "' for writing");
                out << text;
                if (!out) throw holsim::IoError("short write to '" + preset_output + "'");
            }
        }
    } catch (const holsim::Error& err) {
        return report_error(err);
    } catch (const std::exception& err) {
        nlohmann::json doc;
        doc["error"] = {{"category", "internal"}, {"exit_code", 1}, {"message", err.what()}};
        std::cerr << doc.dump() << "\n";
        return 1;
    }
    return 0;
}
