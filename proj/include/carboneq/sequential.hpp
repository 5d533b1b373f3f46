#pragma once

// Sequential load shifting: clear with fixed maximum demand, publish the
// resulting average carbon (lambda_b), let each consumer re-optimize against
// its own price and lambda_b, then clear again with those demands fixed.

#include <span>
#include <string>
#include <vector>

#include "carboneq/clearing.hpp"
#include "carboneq/equilibrium.hpp"
#include "carboneq/network.hpp"

namespace carboneq {

enum class ShiftDecision { StayedMax, DroppedToMin, Indifferent };

const char* to_string(ShiftDecision decision) noexcept;

struct SequentialOptions {
    double residual_tol = 1e-6;  // |u| at or below this counts as indifferent
    lp::Tolerances lp;
};

struct SequentialResult {
    ClearingSolution step1;
    double lambda_b = 0.0;
    std::vector<ShiftDecision> decisions;
    std::vector<double> shifted_demands;
    ClearingSolution step3;
    double lambda_a = 0.0;
};

/// Step 2 on its own: each consumer's choice from its nodal price (prices
/// ordered like network.buses), lambda_b, and its own parameters only.
std::vector<ShiftDecision> shift_decisions(const Network& network, std::span<const double> bus_prices, double lambda_b,
                                           double tol);

SequentialResult run_sequential(const Network& network, const SequentialOptions& options = {});

enum class Reaction { None, Overreaction, Underreaction, Mixed };

const char* to_string(Reaction reaction) noexcept;

struct ConsumerDifference {
    std::size_t consumer = 0;  // index into network.consumers
    double equilibrium = 0.0;  // MW
    double sequential = 0.0;   // MW
};

struct ComparisonReport {
    MetricsBundle equilibrium;
    MetricsBundle sequential;
    double lambda_star = 0.0;
    double lambda_b = 0.0;
    double lambda_a = 0.0;
    std::vector<ConsumerDifference> differences;
    /// Overreaction: sequential consumes less than the equilibrium somewhere
    /// and never more; Underreaction the reverse.
    Reaction classification = Reaction::None;
};

ComparisonReport compare(const EquilibriumCertificate& eq, const SequentialResult& seq, double tol = 1e-6);

}  // namespace carboneq
