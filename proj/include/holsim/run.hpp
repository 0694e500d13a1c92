// run.hpp — experiment orchestration: resolve a scenario into artifacts on
// disk (CSV tables + scenario.json + manifest.json) with deterministic bytes
// for identical inputs.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "holsim/scenario.hpp"
#include "holsim/transport.hpp"
#include "holsim/walks.hpp"

namespace holsim {

std::uint64_t fnv1a64(std::string_view text);
/// 16 lowercase hex digits.
std::string hex_digest(std::uint64_t value);

struct RunOptions {
    std::string out_root = "out";    // HOLSIM_OUT_ROOT / --out-root
    std::string directory_override;  // --out; wins over the scenario's output.directory
    bool force = false;              // required to reuse a non-empty directory
    int jobs = 1;                    // HOLSIM_JOBS / --jobs
};

struct RunResult {
    std::filesystem::path directory;
    std::vector<std::string> files;  // names within directory; manifest.json last
    std::string input_hash;          // digest of command + canonical inputs
};

/// Joint unitary run when the scenario has a bath block, reduced open-system
/// run otherwise. Writes trajectory.csv (+ msd.csv, snapshots.csv on demand).
RunResult run_simulate(const Scenario& scenario, const RunOptions& options);

/// Transfer efficiency vs uniform dephasing rate; writes sweep.csv.
RunResult run_sweep_dephasing(const Scenario& scenario, std::span<const double> gamma_grid,
                              const RunOptions& options);

/// Spreading-exponent scan; writes crossover.csv.
RunResult run_crossover(const Scenario& scenario, std::span<const double> gamma_grid,
                        const RunOptions& options);

enum class WalkKind { Classical, Quantum, Both };
const char* walk_kind_name(WalkKind kind);
std::optional<WalkKind> walk_kind_from_name(const std::string& name);

struct WalkRunConfig {
    int steps = 100;
    WalkKind kind = WalkKind::Both;
    bool symmetric_coin = false;  // start from the left/right-symmetric coin state
    std::string name = "walk";
};

/// Writes walk_classical.csv and/or walk_quantum.csv.
RunResult run_walk(const WalkRunConfig& config, const RunOptions& options);

struct MemoryReport {
    std::optional<int> qubits;
    std::optional<std::uint64_t> state_bits;
    std::optional<std::uint64_t> state_bytes;
    std::optional<std::uint64_t> budget_bits;
    std::optional<int> budget_qubits;

    std::string render() const;
};

/// Pure computation behind `memory`; at least one argument must be present.
MemoryReport memory_report(std::optional<int> qubits, std::optional<std::uint64_t> budget_bits);

// Pure CSV formatters behind the artifact files.
std::string trajectory_csv(const Trajectory& traj);
std::string sweep_csv(const EfficiencyCurve& curve);
std::string crossover_csv(const CrossoverReport& report);
std::string walk_csv(const WalkDistribution& dist);
std::string msd_csv(std::span<const MsdPoint> points);

/// n logarithmically spaced points from lo to hi inclusive (n >= 2, 0 < lo < hi).
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace holsim
