#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "carboneq/network.hpp"

namespace carboneq {

struct CarbonCostSpec {
    enum class Kind { None, Explicit, UniformRange };
    Kind kind = Kind::None;
    std::vector<double> values;  // Explicit, ordered like consumers
    double low = 0.0;            // UniformRange
    double high = 0.0;
    std::uint64_t seed = 0;
};

struct Scenario {
    std::string name;
    std::string provenance;
    Network network;
    CarbonCostSpec carbon;

    /// The network with `carbon` applied to the consumers' carbon costs.
    Network resolved_network() const;
};

inline constexpr std::string_view kScenarioFormatVersion = "1";

Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical form: fixed key order, two-space indent, shortest round-trip
/// numbers, trailing newline.
std::string serialize_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Uniform draws from std::mt19937_64(seed): low + u * (high - low) with
/// u = (x >> 11) * 2^-53, one draw per consumer in order.
std::vector<double> sample_carbon_costs(std::span<const Consumer> consumers, double low, double high,
                                        std::uint64_t seed);
std::vector<double> sample_uniform(std::size_t count, double low, double high, std::uint64_t seed);

/// Overwrites consumer carbon costs. Throws InvalidConfig on a length mismatch.
void apply_carbon_costs(Network& network, const CarbonCostSpec& spec);

using FuelEmissionTable = std::map<std::string, double>;

/// Natural Gas/NG 0.6042, Oil 0.7434, Coal 0.9606, Wind/Solar/Hydro 0 (tons/MWh).
FuelEmissionTable standard_fuel_table();

enum class CostModel { AverageAtMax, MarginalAtMax };

struct SnapshotConfig {
    FuelEmissionTable fuels = standard_fuel_table();
    /// P_G^max multiplier by fuel name; fuels not listed keep their rating.
    std::map<std::string, double> capacity_factor;
    CostModel cost_model = CostModel::AverageAtMax;
    bool respect_pmin = false;  // otherwise every unit may dispatch down to 0
    double base_mva = 100.0;    // susceptance = base_mva / X
    double min_demand_fraction = 0.8;
    double utility_low = 0.0;  // r_D ~ U[utility_low, utility_high]
    double utility_high = 0.0;
    std::uint64_t utility_seed = 0;
    std::size_t expected_consumers = 51;
    bool pool_mode = false;
};

/// The committed single-hour snapshot used by the built-in "rts_gmlc" scenario.
SnapshotConfig default_rts_snapshot();

/// Reads bus.csv, branch.csv and gen.csv in the RTS-GMLC SourceData layout.
Network ingest_rts_gmlc(const std::filesystem::path& directory, const SnapshotConfig& config);

std::filesystem::path data_directory();

std::vector<std::string> builtin_scenario_names();
bool is_builtin_scenario(std::string_view name);
Scenario builtin_scenario(std::string_view name);

/// Built-in names win over filesystem paths; a collision is reported on `warn`.
Scenario resolve_scenario(std::string_view name_or_path, std::ostream* warn = nullptr);

}  // namespace carboneq
