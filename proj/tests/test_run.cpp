#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "holsim/csv.hpp"
#include "holsim/run.hpp"
#include "holsim/scenario.hpp"

using namespace holsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / "holsim_tests" / tag;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open ", path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

}  // namespace

TEST_SUITE("run") {

TEST_CASE("doubles format as shortest round-trip decimals") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(-2.5) == "-2.5");
    CHECK(format_double(std::sqrt(2.0)) == "1.4142135623730951");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK_THROWS_AS(format_double(std::nan("")), IoError);
    CHECK(format_int(-42) == "-42");

    // whatever the spelling, the value must survive a round trip
    for (double v : {1.0 / 3.0, 6.02e23, 1e-300, -0.0625}) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("csv rows are arity-checked against the header") {
    CsvWriter csv({"a", "b"});
    csv.row({"1", "2"});
    CHECK(csv.rows() == 1);
    CHECK(csv.text() == "a,b\n1,2\n");
    CHECK_THROWS_AS(csv.row({"only-one"}), IoError);
    CHECK_THROWS_AS(CsvWriter(std::vector<std::string>{}), IoError);
}

TEST_CASE("fnv-1a matches the published test vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
    CHECK(hex_digest(0xcbf29ce484222325ull) == "cbf29ce484222325");
    CHECK(hex_digest(0) == "0000000000000000");
}

TEST_CASE("log grids hit both endpoints exactly") {
    const auto grid = log_grid(1e-2, 1e3, 11);
    REQUIRE(grid.size() == 11);
    CHECK(grid.front() == 1e-2);  // bitwise, not approximately
    CHECK(grid.back() == 1e3);
    for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] > grid[k - 1]);
    // uniform ratio in log space
    CHECK(grid[5] == doctest::Approx(std::sqrt(1e-2 * 1e3)));
    CHECK_THROWS_AS(log_grid(1.0, 10.0, 1), ValidationError);
    CHECK_THROWS_AS(log_grid(0.0, 10.0, 5), ValidationError);
    CHECK_THROWS_AS(log_grid(10.0, 1.0, 5), ValidationError);
}

TEST_CASE("trajectory csv carries one population column per site") {
    Trajectory traj;
    traj.n_sites = 2;
    traj.records.push_back({0.0, {1.0, 0.0}, 0.0, 1.0, 0.0, {}, {}});
    const std::string text = trajectory_csv(traj);
    CHECK(text.substr(0, text.find('\n')) == "t,pop_0,pop_1,l1_coherence,trace,sink_captured");
    CHECK(count_lines(text) == 2);
}

TEST_CASE("walk csv repeats the run summary on every row") {
    const std::string text = walk_csv(classical_walk(2));
    CHECK(text ==
          "position,probability,steps,stddev\n"
          "-2,0.25,2,1.4142135623730951\n"
          "-1,0,2,1.4142135623730951\n"
          "0,0.5,2,1.4142135623730951\n"
          "1,0,2,1.4142135623730951\n"
          "2,0.25,2,1.4142135623730951\n");
    // 100 steps: the standard deviation cell is exactly "10"
    const std::string hundred = walk_csv(classical_walk(100));
    const std::string first_row = hundred.substr(hundred.find('\n') + 1);
    CHECK(first_row.substr(0, first_row.find('\n')) ==
          "-100," + format_double(classical_walk(100).probability_at(-100)) + ",100,10");
}

TEST_CASE("simulate writes scenario, trajectory, and manifest") {
    const fs::path dir = fresh_dir("simulate_dimer");
    Scenario scenario = preset_scenario("dimer");
    RunOptions options;
    options.directory_override = (dir / "run").string();

    const RunResult result = run_simulate(scenario, options);
    CHECK(result.directory == fs::path(options.directory_override));
    REQUIRE(result.files.size() == 3);
    CHECK(result.files[0] == "scenario.json");
    CHECK(result.files[1] == "trajectory.csv");
    CHECK(result.files.back() == "manifest.json");

    // the stored scenario is the canonical serialization
    CHECK(read_file(result.directory / "scenario.json") == serialize_scenario(scenario));

    // the manifest describes every artifact faithfully
    const json manifest = json::parse(read_file(result.directory / "manifest.json"));
    CHECK(manifest["manifest_version"] == 1);
    CHECK(manifest["tool"]["name"] == "holsim");
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest["jobs"] == 1);
    CHECK(manifest["input_hash"] == result.input_hash);
    CHECK(result.input_hash ==
          hex_digest(fnv1a64("simulate\n" + scenario_to_json(scenario).dump())));
    CHECK(manifest["wall_time_seconds"].is_number());
    for (const json& entry : manifest["outputs"]) {
        const std::string content = read_file(result.directory / entry["file"].get<std::string>());
        CHECK(entry["bytes"].get<std::size_t>() == content.size());
        CHECK(entry["fnv1a64"].get<std::string>() == hex_digest(fnv1a64(content)));
    }
    const std::string traj = read_file(result.directory / "trajectory.csv");
    CHECK(manifest["outputs"][1]["rows"].get<std::size_t>() == count_lines(traj) - 1);

    SUBCASE("a non-empty directory is refused without --force") {
        CHECK_THROWS_WITH_AS(run_simulate(scenario, options),
                             doctest::Contains("pass --force"), IoError);
    }
    SUBCASE("a forced re-run reproduces identical bytes") {
        options.force = true;
        const RunResult again = run_simulate(scenario, options);
        CHECK(read_file(again.directory / "trajectory.csv") == traj);
        CHECK(again.input_hash == result.input_hash);
    }
}

TEST_CASE("output directories resolve override, scenario, then out-root") {
    const fs::path dir = fresh_dir("directories");
    Scenario scenario = preset_scenario("dimer");
    scenario.integrator.t_total = 0.1;

    RunOptions options;
    options.out_root = (dir / "root").string();
    const RunResult by_root = run_simulate(scenario, options);
    CHECK(by_root.directory.parent_path() == fs::path(options.out_root));
    const std::string leaf = by_root.directory.filename().string();
    CHECK(leaf == "dimer-" + by_root.input_hash.substr(0, 8));

    scenario.output.directory = (dir / "from_scenario").string();
    const RunResult by_scenario = run_simulate(scenario, options);
    CHECK(by_scenario.directory == fs::path(scenario.output.directory));

    options.directory_override = (dir / "from_flag").string();
    const RunResult by_flag = run_simulate(scenario, options);
    CHECK(by_flag.directory == fs::path(options.directory_override));
}

TEST_CASE("simulate with a bath block runs the joint unitary model") {
    const fs::path dir = fresh_dir("simulate_bath");
    Scenario scenario = preset_scenario("dimer-bath");
    scenario.integrator.t_total = 1.0;
    RunOptions options;
    options.directory_override = (dir / "run").string();
    const RunResult result = run_simulate(scenario, options);
    const std::string traj = read_file(result.directory / "trajectory.csv");
    CHECK(traj.substr(0, traj.find('\n')) == "t,pop_0,pop_1,l1_coherence,trace,sink_captured");
    // unitary joint evolution keeps the trace column pinned to 1
    const std::string last = traj.substr(traj.rfind('\n', traj.size() - 2) + 1);
    std::stringstream cells(last);
    std::string cell;
    std::vector<std::string> row;
    while (std::getline(cells, cell, ',')) row.push_back(cell);
    REQUIRE(row.size() == 6);
    CHECK(std::strtod(row[4].c_str(), nullptr) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("observables add msd and snapshot artifacts") {
    const fs::path dir = fresh_dir("simulate_observables");
    Scenario scenario = preset_scenario("dimer");
    scenario.integrator.t_total = 1.0;
    scenario.observables.msd = MsdObservable{};
    scenario.output.snapshots = true;
    RunOptions options;
    options.directory_override = (dir / "run").string();
    const RunResult result = run_simulate(scenario, options);
    REQUIRE(result.files.size() == 5);
    CHECK(result.files[2] == "msd.csv");
    CHECK(result.files[3] == "snapshots.csv");

    const std::string msd = read_file(result.directory / "msd.csv");
    CHECK(msd.substr(0, msd.find('\n')) == "t,msd");
    CHECK(msd.find("\n0,0\n") != std::string::npos);  // localized start has zero spread

    const std::string snaps = read_file(result.directory / "snapshots.csv");
    CHECK(snaps.substr(0, snaps.find('\n')) == "t,row,col,re,im");
}

TEST_CASE("dephasing sweeps write one row per grid point") {
    const fs::path dir = fresh_dir("sweep");
    Scenario scenario = preset_scenario("dimer-detuned");
    scenario.integrator.t_total = 5.0;
    RunOptions options;
    options.directory_override = (dir / "run").string();
    options.jobs = 2;
    const std::vector<double> grid{0.5, 5.0};

    const RunResult result = run_sweep_dephasing(scenario, grid, options);
    const std::string sweep = read_file(result.directory / "sweep.csv");
    CHECK(sweep.substr(0, sweep.find('\n')) == "gamma,eta,t50");
    CHECK(count_lines(sweep) == 3);
    CHECK(sweep.find("\n0.5,") != std::string::npos);
    CHECK(sweep.find("\n5,") != std::string::npos);
    const json manifest = json::parse(read_file(result.directory / "manifest.json"));
    CHECK(manifest["jobs"] == 2);
    CHECK(manifest["command"] == "sweep-dephasing");
    CHECK(manifest["inputs"]["gamma_grid"] == json::array({0.5, 5.0}));

    SUBCASE("scenarios with a bath block are rejected") {
        const Scenario bathy = preset_scenario("dimer-bath");
        RunOptions other;
        other.directory_override = (dir / "bathy").string();
        CHECK_THROWS_AS(run_sweep_dephasing(bathy, grid, other), ValidationError);
    }
}

TEST_CASE("walk runs write the requested distributions") {
    const fs::path dir = fresh_dir("walks");
    RunOptions options;
    options.directory_override = (dir / "both").string();
    WalkRunConfig config;
    config.steps = 50;

    const RunResult both = run_walk(config, options);
    REQUIRE(both.files.size() == 3);
    CHECK(both.files[0] == "walk_classical.csv");
    CHECK(both.files[1] == "walk_quantum.csv");
    // 101 positions, plus the header
    CHECK(count_lines(read_file(both.directory / "walk_quantum.csv")) == 102);

    options.directory_override = (dir / "classical").string();
    config.kind = WalkKind::Classical;
    const RunResult classical = run_walk(config, options);
    REQUIRE(classical.files.size() == 2);
    CHECK(classical.files[0] == "walk_classical.csv");

    config.steps = 0;
    CHECK_THROWS_AS(run_walk(config, options), ValidationError);

    CHECK(walk_kind_from_name("quantum") == WalkKind::Quantum);
    CHECK(!walk_kind_from_name("sideways").has_value());
    CHECK(std::string(walk_kind_name(WalkKind::Both)) == "both");
}

TEST_CASE("memory reports render both directions of the estimate") {
    const MemoryReport forward = memory_report(31, std::nullopt);
    const std::string text = forward.render();
    CHECK(text.find("qubits: 31\n") != std::string::npos);
    CHECK(text.find("state bits: 137438953472 (= 2^37)\n") != std::string::npos);
    CHECK(text.find("state bytes: 17179869184 (16 GiB)\n") != std::string::npos);

    const MemoryReport backward = memory_report(std::nullopt, std::uint64_t{1} << 37);
    const std::string inverse = backward.render();
    CHECK(inverse.find("budget bits: 137438953472\n") != std::string::npos);
    CHECK(inverse.find("max qubits: 31\n") != std::string::npos);

    const MemoryReport both = memory_report(10, std::uint64_t{1} << 20);
    CHECK(both.qubits.has_value());
    CHECK(both.budget_qubits.has_value());

    CHECK_THROWS_AS(memory_report(std::nullopt, std::nullopt), ValidationError);
    CHECK_THROWS_AS(memory_report(64, std::nullopt), ResourceError);
}

}  // TEST_SUITE
