#include "carboneq/sequential.hpp"

#include <cmath>

#include "carboneq/errors.hpp"

namespace carboneq {

const char* to_string(ShiftDecision decision) noexcept {
    switch (decision) {
        case ShiftDecision::StayedMax: return "StayedMax";
        case ShiftDecision::DroppedToMin: return "DroppedToMin";
        case ShiftDecision::Indifferent: return "Indifferent";
    }
    return "?";
}

const char* to_string(Reaction reaction) noexcept {
    switch (reaction) {
        case Reaction::None: return "None";
        case Reaction::Overreaction: return "Overreaction";
        case Reaction::Underreaction: return "Underreaction";
        case Reaction::Mixed: return "Mixed";
    }
    return "?";
}

std::vector<ShiftDecision> shift_decisions(const Network& net, std::span<const double> bus_prices, double lambda_b,
                                           double tol) {
    if (bus_prices.size() != net.buses.size())
        throw DimensionMismatch("expected one price per bus, got " + std::to_string(bus_prices.size()));
    std::vector<ShiftDecision> out;
    out.reserve(net.consumers.size());
    for (const auto& c : net.consumers) {
        const double u = c.utility - bus_prices[net.bus_index(c.bus)] - lambda_b * c.carbon_cost;
        if (u > tol) out.push_back(ShiftDecision::StayedMax);
        else if (u < -tol) out.push_back(ShiftDecision::DroppedToMin);
        else out.push_back(ShiftDecision::Indifferent);
    }
    return out;
}

SequentialResult run_sequential(const Network& net, const SequentialOptions& opt) {
    SequentialResult r;
    ClearingConfig day_ahead;
    day_ahead.demand_mode = DemandMode::FixedAtMax;
    day_ahead.lp = opt.lp;
    r.step1 = clear(net, day_ahead);
    r.lambda_b = r.step1.lambda;

    r.decisions = shift_decisions(net, r.step1.prices, r.lambda_b, opt.residual_tol);
    for (std::size_t d = 0; d < net.consumers.size(); ++d) {
        const auto& c = net.consumers[d];
        r.shifted_demands.push_back(r.decisions[d] == ShiftDecision::DroppedToMin ? c.d_min : c.d_max);
    }

    ClearingConfig intra_day;
    intra_day.demand_mode = DemandMode::FixedAtGiven;
    intra_day.given_demands = r.shifted_demands;
    intra_day.carbon_aware = true;
    intra_day.lp = opt.lp;
    r.step3 = clear(net, intra_day);
    r.lambda_a = r.step3.lambda;
    return r;
}

ComparisonReport compare(const EquilibriumCertificate& eq, const SequentialResult& seq, double tol) {
    if (eq.solution.network_fingerprint != seq.step3.network_fingerprint ||
        seq.step1.network_fingerprint != seq.step3.network_fingerprint)
        throw MismatchedNetworks("equilibrium and sequential results come from different networks");
    const auto& a = eq.solution.consumption;
    const auto& b = seq.step3.consumption;
    if (a.size() != b.size()) throw MismatchedNetworks("consumer counts differ");

    ComparisonReport rep;
    rep.equilibrium = eq.solution.metrics;
    rep.sequential = seq.step3.metrics;
    rep.lambda_star = eq.lambda_star;
    rep.lambda_b = seq.lambda_b;
    rep.lambda_a = seq.lambda_a;
    bool less = false, more = false;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = b[d] - a[d];
        if (std::abs(diff) <= tol * (1.0 + std::abs(a[d]))) continue;
        rep.differences.push_back({d, a[d], b[d]});
        (diff < 0.0 ? less : more) = true;
    }
    rep.classification = less && more ? Reaction::Mixed
                         : less       ? Reaction::Overreaction
                         : more       ? Reaction::Underreaction
                                      : Reaction::None;
    return rep;
}

}  // namespace carboneq
