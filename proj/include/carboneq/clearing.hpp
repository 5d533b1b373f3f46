#pragma once

// Welfare-maximizing market clearing for a fixed carbon signal.
//
// Variables are ordered [P_G | P_D | theta] (theta only in constrained mode).
// Balance rows read  sum P_D + sum_lines outflow - sum P_G = 0, so their
// duals are the nodal prices directly.

#include <cstdint>
#include <span>
#include <vector>

#include "carboneq/lp_core.hpp"
#include "carboneq/network.hpp"

namespace carboneq {

enum class DemandMode { FixedAtMax, Flexible, FixedAtGiven };
enum class NetworkMode { FromNetwork, Pool, Constrained };

struct ClearingConfig {
    DemandMode demand_mode = DemandMode::Flexible;
    std::vector<double> given_demands;  // FixedAtGiven only, ordered like consumers
    double lambda_parameter = 0.0;
    NetworkMode network_mode = NetworkMode::FromNetwork;
    /// Whether consumers bear their carbon cost; only changes total_carbon_cost.
    bool carbon_aware = false;
    lp::Tolerances lp;
};

struct MetricsBundle {
    double total_generation = 0.0;
    double total_generation_cost = 0.0;
    double total_carbon = 0.0;
    double average_carbon = 0.0;  // total_carbon / total_generation
    double gross_consumer_utility = 0.0;
    double total_carbon_cost = 0.0;  // lambda * sum c_D P_D when carbon_aware
    double total_demand = 0.0;
    bool zero_demand = false;  // lambda forced to 0
};

struct ClearingSolution {
    std::vector<double> dispatch;     // per generator
    std::vector<double> consumption;  // per consumer
    std::vector<double> angles;       // per bus; empty in pool mode
    std::vector<double> prices;       // per bus
    double lambda = 0.0;              // ex-post average of this solution
    double lambda_parameter = 0.0;
    double welfare = 0.0;             // LP objective at lambda_parameter
    MetricsBundle metrics;
    std::uint64_t network_fingerprint = 0;
};

MetricsBundle compute_metrics(const Network& network, std::span<const double> dispatch,
                              std::span<const double> consumption, bool carbon_aware);

lp::Problem build_welfare_lp(const Network& network, const ClearingConfig& config);

ClearingSolution clear(const Network& network, const ClearingConfig& config);

struct EmissionRange {
    double lambda_low = 0.0;  // ex-post average extremes over the optimal face
    double lambda_high = 0.0;
    ClearingSolution low_witness;
    ClearingSolution high_witness;
    // Extremes of E - lambda_parameter * D over the face and their witnesses.
    double excess_min = 0.0;
    double excess_max = 0.0;
    ClearingSolution excess_min_witness;
    ClearingSolution excess_max_witness;
    ClearingSolution primary;
};

EmissionRange emission_range_at_optimum(const Network& network, const ClearingConfig& config);

/// Repeated clearings of one network across lambda values, warm-starting
/// each LP from the previous basis. Not thread-safe.
class WelfareClearing {
public:
    WelfareClearing(Network network, ClearingConfig config);

    ClearingSolution clear(double lambda_parameter);
    EmissionRange emission_range(double lambda_parameter);

    const Network& network() const noexcept { return network_; }
    const ClearingConfig& config() const noexcept { return config_; }
    bool pool() const noexcept { return pool_; }

private:
    lp::Solution solve_primary(double lambda_parameter);
    ClearingSolution to_solution(const std::vector<double>& x, const std::vector<double>& duals,
                                 double lambda_parameter, double welfare) const;

    Network network_;
    ClearingConfig config_;
    bool pool_;
    lp::Problem lp_;
    lp::Basis basis_;
    std::uint64_t fingerprint_;
};

}  // namespace carboneq
