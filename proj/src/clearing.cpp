#include "carboneq/clearing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "carboneq/errors.hpp"

namespace carboneq {

namespace {

bool is_pool(const Network& net, const ClearingConfig& cfg) {
    switch (cfg.network_mode) {
        case NetworkMode::Pool: return true;
        case NetworkMode::Constrained: return false;
        case NetworkMode::FromNetwork: break;
    }
    return net.pool_mode;
}

void check_config(const Network& net, const ClearingConfig& cfg) {
    if (!(cfg.lambda_parameter >= 0.0) || !std::isfinite(cfg.lambda_parameter))
        throw InvalidConfig("lambda_parameter must be finite and >= 0");
    if (cfg.demand_mode != DemandMode::FixedAtGiven) return;
    if (cfg.given_demands.size() != net.consumers.size())
        throw InvalidConfig("given demands have " + std::to_string(cfg.given_demands.size()) + " entries for " +
                            std::to_string(net.consumers.size()) + " consumers");
    for (std::size_t d = 0; d < net.consumers.size(); ++d) {
        const auto& c = net.consumers[d];
        const double v = cfg.given_demands[d];
        const double slack = 1e-9 * (1.0 + std::abs(c.d_max));
        if (!(v >= c.d_min - slack && v <= c.d_max + slack))
            throw InvalidConfig("given demand " + std::to_string(v) + " for consumer " + c.id + " outside [" +
                                std::to_string(c.d_min) + ", " + std::to_string(c.d_max) + "]");
    }
}

}  // namespace

MetricsBundle compute_metrics(const Network& net, std::span<const double> dispatch, std::span<const double> consumption,
                              bool carbon_aware) {
    MetricsBundle m;
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const auto& gen = net.generators[g];
        m.total_generation += dispatch[g];
        m.total_generation_cost += gen.cost * dispatch[g];
        m.total_carbon += gen.emission * dispatch[g];
    }
    double carbon_weighted = 0.0;
    for (std::size_t d = 0; d < net.consumers.size(); ++d) {
        m.total_demand += consumption[d];
        m.gross_consumer_utility += net.consumers[d].utility * consumption[d];
        carbon_weighted += net.consumers[d].carbon_cost * consumption[d];
    }
    m.average_carbon = m.total_generation > 0.0 ? m.total_carbon / m.total_generation : 0.0;
    m.zero_demand = !(m.total_demand > 0.0);
    const double lambda = m.zero_demand ? 0.0 : m.total_carbon / m.total_demand;
    m.total_carbon_cost = carbon_aware ? lambda * carbon_weighted : 0.0;
    return m;
}

lp::Problem build_welfare_lp(const Network& net, const ClearingConfig& cfg) {
    require_valid(net);
    check_config(net, cfg);
    const bool pool = is_pool(net, cfg);
    const std::size_t ng = net.generators.size();
    const std::size_t nd = net.consumers.size();
    const std::size_t nb = pool ? 0 : net.buses.size();
    const std::size_t nv = ng + nd + nb;
    const std::size_t nrows = pool ? 1 : nb + 2 * net.lines.size();

    lp::Problem p;
    p.objective.assign(nv, 0.0);
    p.lower.assign(nv, 0.0);
    p.upper.assign(nv, 0.0);
    p.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(nv));
    p.senses.assign(nrows, lp::Sense::Equal);
    p.rhs.assign(nrows, 0.0);

    auto row_of_bus = [&](int bus) -> Eigen::Index {
        return pool ? 0 : static_cast<Eigen::Index>(net.bus_index(bus));
    };
    for (std::size_t g = 0; g < ng; ++g) {
        const auto& gen = net.generators[g];
        p.objective[g] = -gen.cost;
        p.lower[g] = gen.p_min;
        p.upper[g] = gen.p_max;
        p.matrix(row_of_bus(gen.bus), static_cast<Eigen::Index>(g)) -= 1.0;
    }
    for (std::size_t d = 0; d < nd; ++d) {
        const auto& c = net.consumers[d];
        const std::size_t j = ng + d;
        p.objective[j] = c.utility - cfg.lambda_parameter * c.carbon_cost;
        switch (cfg.demand_mode) {
            case DemandMode::Flexible: p.lower[j] = c.d_min; p.upper[j] = c.d_max; break;
            case DemandMode::FixedAtMax: p.lower[j] = p.upper[j] = c.d_max; break;
            case DemandMode::FixedAtGiven:
                p.lower[j] = p.upper[j] = std::clamp(cfg.given_demands[d], c.d_min, c.d_max);
                break;
        }
        p.matrix(row_of_bus(c.bus), static_cast<Eigen::Index>(j)) += 1.0;
    }
    if (pool) return p;

    const std::size_t theta0 = ng + nd;
    for (std::size_t b = 0; b < nb; ++b) {
        const bool ref = net.buses[b] == net.reference_bus;
        p.lower[theta0 + b] = ref ? 0.0 : -lp::kInf;
        p.upper[theta0 + b] = ref ? 0.0 : lp::kInf;
    }
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        const auto& line = net.lines[l];
        const auto f = static_cast<Eigen::Index>(net.bus_index(line.from));
        const auto t = static_cast<Eigen::Index>(net.bus_index(line.to));
        const auto tf = static_cast<Eigen::Index>(theta0) + f;
        const auto tt = static_cast<Eigen::Index>(theta0) + t;
        const double beta = line.susceptance;
        // outflow at `from`, inflow at `to`
        p.matrix(f, tf) += beta;
        p.matrix(f, tt) -= beta;
        p.matrix(t, tt) += beta;
        p.matrix(t, tf) -= beta;
        const auto up = static_cast<Eigen::Index>(nb + 2 * l);
        p.matrix(up, tf) = beta;
        p.matrix(up, tt) = -beta;
        p.senses[up] = lp::Sense::LessEqual;
        p.rhs[up] = line.flow_limit;
        p.matrix(up + 1, tf) = beta;
        p.matrix(up + 1, tt) = -beta;
        p.senses[up + 1] = lp::Sense::GreaterEqual;
        p.rhs[up + 1] = -line.flow_limit;
    }
    return p;
}

WelfareClearing::WelfareClearing(Network network, ClearingConfig config)
    : network_(std::move(network)),
      config_(std::move(config)),
      pool_(is_pool(network_, config_)),
      lp_(build_welfare_lp(network_, config_)),
      fingerprint_(fingerprint(network_)) {}

lp::Solution WelfareClearing::solve_primary(double lambda_parameter) {
    if (!(lambda_parameter >= 0.0) || !std::isfinite(lambda_parameter))
        throw InvalidConfig("lambda_parameter must be finite and >= 0");
    const std::size_t ng = network_.generators.size();
    for (std::size_t d = 0; d < network_.consumers.size(); ++d) {
        const auto& c = network_.consumers[d];
        lp_.objective[ng + d] = c.utility - lambda_parameter * c.carbon_cost;
    }
    auto sol = lp::solve(lp_, config_.lp, basis_.empty() ? nullptr : &basis_);
    if (sol.status == lp::Status::Infeasible)
        throw InfeasibleMarket("no dispatch meets the demand lower bounds within network limits (phase-one residual " +
                               std::to_string(sol.infeasibility) + " MW)");
    if (sol.status == lp::Status::Unbounded)
        throw NumericalBreakdown("welfare LP reported unbounded; check for isolated buses");
    basis_ = sol.basis;
    return sol;
}

ClearingSolution WelfareClearing::to_solution(const std::vector<double>& x, const std::vector<double>& duals,
                                              double lambda_parameter, double welfare) const {
    const std::size_t ng = network_.generators.size();
    const std::size_t nd = network_.consumers.size();
    ClearingSolution s;
    s.dispatch.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(ng));
    s.consumption.assign(x.begin() + static_cast<std::ptrdiff_t>(ng),
                         x.begin() + static_cast<std::ptrdiff_t>(ng + nd));
    if (pool_) {
        s.prices.assign(network_.buses.size(), duals.at(0));
    } else {
        s.angles.assign(x.begin() + static_cast<std::ptrdiff_t>(ng + nd), x.end());
        s.prices.assign(duals.begin(), duals.begin() + static_cast<std::ptrdiff_t>(network_.buses.size()));
    }
    s.metrics = compute_metrics(network_, s.dispatch, s.consumption, config_.carbon_aware);
    s.lambda = s.metrics.zero_demand ? 0.0 : s.metrics.total_carbon / s.metrics.total_demand;
    s.lambda_parameter = lambda_parameter;
    s.welfare = welfare;
    s.network_fingerprint = fingerprint_;
    return s;
}

ClearingSolution WelfareClearing::clear(double lambda_parameter) {
    const auto sol = solve_primary(lambda_parameter);
    return to_solution(sol.primal, sol.duals, lambda_parameter, sol.objective);
}

namespace {

struct FaceAverage {
    double value;
    lp::Solution point;
};

double ratio_of(const Network& net, const std::vector<double>& x) {
    const std::size_t ng = net.generators.size();
    double e = 0.0, d = 0.0;
    for (std::size_t g = 0; g < ng; ++g) e += net.generators[g].emission * x[g];
    for (std::size_t k = 0; k < net.consumers.size(); ++k) d += x[ng + k];
    return d > 0.0 ? e / d : 0.0;
}

}  // namespace

EmissionRange WelfareClearing::emission_range(double lambda_parameter) {
    const auto primary = solve_primary(lambda_parameter);
    const auto face = lp::optimal_face(lp_, primary);
    const std::size_t ng = network_.generators.size();
    const std::size_t nd = network_.consumers.size();

    auto excess = [&](double t) {
        std::vector<double> s(lp_.num_vars(), 0.0);
        for (std::size_t g = 0; g < ng; ++g) s[g] = network_.generators[g].emission;
        for (std::size_t d = 0; d < nd; ++d) s[ng + d] = -t;
        return s;
    };
    auto secondary = [&](double t, lp::Direction dir, const lp::Basis& warm) {
        const auto s = excess(t);
        auto r = lp::solve_secondary(face, primary.objective, s, dir, config_.lp, &warm);
        if (r.status != lp::Status::Optimal)
            throw NumericalBreakdown(std::string("secondary LP on the optimal face ended ") + lp::to_string(r.status));
        return r;
    };

    const auto lo = secondary(lambda_parameter, lp::Direction::Minimize, primary.basis);
    const auto hi = secondary(lambda_parameter, lp::Direction::Maximize, primary.basis);

    // Dinkelbach: t <- E/D of the current minimizer (maximizer) of E - tD
    // until no face point beats t.
    auto extreme = [&](const lp::Solution& start, lp::Direction dir) {
        FaceAverage best{ratio_of(network_, start.primal), start};
        const double sign = dir == lp::Direction::Minimize ? 1.0 : -1.0;
        for (int it = 0; it < 100; ++it) {
            auto r = secondary(best.value, dir, best.point.basis);
            double demand = 0.0;
            for (std::size_t d = 0; d < nd; ++d) demand += r.primal[ng + d];
            if (sign * r.objective >= -1e-11 * (1.0 + demand) || !(demand > 0.0)) break;
            const double next = ratio_of(network_, r.primal);
            if (sign * (next - best.value) >= 0.0) break;
            best = {next, std::move(r)};
        }
        return best;
    };
    const auto low = extreme(lo, lp::Direction::Minimize);
    const auto high = extreme(hi, lp::Direction::Maximize);

    EmissionRange out;
    out.primary = to_solution(primary.primal, primary.duals, lambda_parameter, primary.objective);
    out.lambda_low = std::min(low.value, out.primary.lambda);
    out.lambda_high = std::max(high.value, out.primary.lambda);
    out.low_witness = to_solution(low.point.primal, primary.duals, lambda_parameter, primary.objective);
    out.high_witness = to_solution(high.point.primal, primary.duals, lambda_parameter, primary.objective);
    out.excess_min = lo.objective;
    out.excess_max = hi.objective;
    out.excess_min_witness = to_solution(lo.primal, primary.duals, lambda_parameter, primary.objective);
    out.excess_max_witness = to_solution(hi.primal, primary.duals, lambda_parameter, primary.objective);
    return out;
}

ClearingSolution clear(const Network& network, const ClearingConfig& config) {
    WelfareClearing ctx(network, config);
    return ctx.clear(config.lambda_parameter);
}

EmissionRange emission_range_at_optimum(const Network& network, const ClearingConfig& config) {
    WelfareClearing ctx(network, config);
    return ctx.emission_range(config.lambda_parameter);
}

}  // namespace carboneq
