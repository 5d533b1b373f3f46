#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace carboneq {

struct Generator {
    std::string id;
    int bus = 0;
    double cost = 0.0;       // $/MWh
    double p_min = 0.0;      // MW
    double p_max = 0.0;      // MW
    double emission = 0.0;   // tons/MWh
};

struct Consumer {
    std::string id;
    int bus = 0;
    double utility = 0.0;      // r_D, $/MWh
    double carbon_cost = 0.0;  // c_D, $/ton
    double d_min = 0.0;        // MW
    double d_max = 0.0;        // MW
};

// Flow on the line is susceptance * (theta_from - theta_to), positive from
// `from` to `to`. The limit applies symmetrically in both directions.
struct Line {
    std::string id;
    int from = 0;
    int to = 0;
    double susceptance = 0.0;  // MW/rad
    double flow_limit = 0.0;   // MW
};

struct Network {
    std::vector<int> buses;
    std::vector<Line> lines;
    std::vector<Generator> generators;
    std::vector<Consumer> consumers;
    int reference_bus = 0;
    bool pool_mode = false;  // ignore lines and angles entirely

    /// Position of `bus` in `buses`; throws ValidationFailed when absent.
    std::size_t bus_index(int bus) const;
};

struct Violation {
    std::string entity;  // "generator G1", "line L3", "network"
    std::string rule;    // BoundsInverted, DanglingEndpoint, ...
    std::string detail;

    friend bool operator==(const Violation&, const Violation&) = default;
};

std::vector<Violation> validate(const Network& network);

/// Throws ValidationFailed listing every violation when `network` is invalid.
void require_valid(const Network& network);

/// Sum of e_G * P_G. `dispatch` is ordered like network.generators.
double total_emissions(const Network& network, std::span<const double> dispatch);
double total_emissions(const Network& network, const std::map<std::string, double>& dispatch_by_id);

/// Stable 64-bit digest (FNV-1a) of every field of the network.
std::uint64_t fingerprint(const Network& network);

}  // namespace carboneq
