// scenario.hpp — versioned JSON scenario documents: parse with aggregated
// field-level diagnostics, canonical (default-materialized, sorted-key)
// serialization, bath discretization from a spectral density, and the
// shipped presets.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "holsim/dynamics.hpp"
#include "holsim/model.hpp"
#include "holsim/rng.hpp"

namespace holsim {

enum class SpectralFamily { OhmicExponentialCutoff, Flat, ExplicitTable };

const char* spectral_family_name(SpectralFamily family);
std::optional<SpectralFamily> spectral_family_from_name(const std::string& name);

/// Continuous J(omega) plus the discretization knobs (mode count, per-mode
/// Fock cutoff, per-site coupling scales).
struct SpectralDensitySpec {
    SpectralFamily family = SpectralFamily::OhmicExponentialCutoff;
    double coupling_scale = 0.1;  // eta
    double cutoff = 1.0;          // omega_c, ohmic family only
    double band_lo = 0.0;
    double band_hi = 0.0;
    int n_modes = 1;
    int fock_cutoff = 1;
    std::vector<double> site_scales;                 // empty = uniform 1.0
    std::vector<std::pair<double, double>> table;    // explicit-table knots (omega, J)

    void validate(int n_sites) const;
    double density_at(double omega) const;
};

/// Midpoint-rule discretization: K equal subintervals of [band_lo, band_hi],
/// one mode per midpoint, g_{i,k} = site_scale_i * sqrt(J(omega_k) * dw).
BathSpec discretize_spectral_density(const SpectralDensitySpec& spec, int n_sites);

struct GeneratorSpec {
    Topology topology = Topology::Chain;
    int n_sites = 0;
    std::uint64_t seed = 0;
    Distribution energy = Distribution::constant(0.0);
    Distribution coupling = Distribution::constant(1.0);
    std::vector<std::pair<int, int>> edges;  // Topology::Explicit only
};

struct NetworkBlock {
    std::optional<SiteNetwork> explicit_network;  // exactly one of the two
    std::optional<GeneratorSpec> generator;
};

struct BathBlock {
    std::optional<BathSpec> explicit_bath;          // exactly one of the two
    std::optional<SpectralDensitySpec> spectral;
};

struct ChannelsBlock {
    std::vector<double> dephasing_rates;  // empty = none; scalar input is broadcast
    std::vector<Hop> hops;
    std::optional<Sink> sink;
};

struct InitialStateBlock {
    std::optional<int> site;          // exactly one of the two
    std::vector<Complex> amplitudes;  // site-space amplitudes, bath starts in vacuum
};

struct MsdObservable {
    int origin_site = -1;           // < 0: initial-state site
    std::vector<double> positions;  // empty: site indices
};

struct ObservablesBlock {
    std::optional<MsdObservable> msd;
};

struct OutputBlock {
    std::string directory;  // empty = <out-root>/<name>-<input-hash8>
    bool snapshots = false;
};

struct Scenario {
    int schema_version = 1;
    std::string name;
    NetworkBlock network;
    std::optional<BathBlock> bath;
    ChannelsBlock channels;
    InitialStateBlock initial_state;
    IntegratorConfig integrator;
    ObservablesBlock observables;
    OutputBlock output;

    /// Generator materialized (deterministic in the seed), sink attached.
    SiteNetwork realize_network() const;
    BathSpec realize_bath(int n_sites) const;  // requires a bath block
    ChannelSpec realize_channels(int n_sites) const;
};

/// Full-document parse. Collects every issue (syntax, unknown keys, types,
/// ranges, referential integrity) and throws a single ScenarioValidationError
/// carrying the list; never fail-fast on the first field.
Scenario parse_scenario(const std::string& text);

Scenario scenario_from_json(const nlohmann::json& doc);

/// Canonical form: defaults materialized, keys sorted, 2-space indent,
/// trailing newline. serialize(parse(serialize(parse(x)))) is byte-stable.
nlohmann::json scenario_to_json(const Scenario& scenario);
std::string serialize_scenario(const Scenario& scenario);

std::vector<std::string> preset_names();
/// Throws ValidationError for an unknown name.
Scenario preset_scenario(const std::string& name);

}  // namespace holsim
