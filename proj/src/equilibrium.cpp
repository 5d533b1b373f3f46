#include "carboneq/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "carboneq/errors.hpp"

namespace carboneq {

double ResidualReport::max_player_gap() const {
    double m = std::max(transmission_gap, line_overload);
    for (double g : generator_gaps) m = std::max(m, g);
    for (double g : consumer_gaps) m = std::max(m, g);
    return m;
}

double ResidualReport::max_balance() const {
    double m = 0.0;
    for (double b : balance) m = std::max(m, std::abs(b));
    return m;
}

bool ResidualReport::passes(double tol, double total_demand) const {
    return max_player_gap() <= tol && max_balance() <= tol && carbon <= tol * (1.0 + std::abs(total_demand));
}

namespace {

// Best-response gap of a price-taker maximizing margin * x over [lo, hi].
double box_gap(double margin, double lo, double hi, double x) {
    const double best = std::max(margin * lo, margin * hi);
    const double outside = std::max({0.0, lo - x, x - hi});
    return std::max(0.0, best - margin * x) + outside * (1.0 + std::abs(margin));
}

double transmission_gap(const Network& net, const ClearingSolution& cand, double& overload) {
    const std::size_t nb = net.buses.size();
    const std::size_t nl = net.lines.size();
    lp::Problem p;
    p.objective.assign(nb, 0.0);
    p.lower.assign(nb, -lp::kInf);
    p.upper.assign(nb, lp::kInf);
    p.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * nl), static_cast<Eigen::Index>(nb));
    const std::size_t ref = net.bus_index(net.reference_bus);
    p.lower[ref] = p.upper[ref] = 0.0;

    double realized = 0.0;
    overload = 0.0;
    for (std::size_t l = 0; l < nl; ++l) {
        const auto& line = net.lines[l];
        const std::size_t f = net.bus_index(line.from);
        const std::size_t t = net.bus_index(line.to);
        const double spread = cand.prices[t] - cand.prices[f];
        const double beta = line.susceptance;
        p.objective[f] += spread * beta;
        p.objective[t] -= spread * beta;
        const auto r = static_cast<Eigen::Index>(2 * l);
        p.matrix(r, static_cast<Eigen::Index>(f)) = beta;
        p.matrix(r, static_cast<Eigen::Index>(t)) = -beta;
        p.matrix(r + 1, static_cast<Eigen::Index>(f)) = beta;
        p.matrix(r + 1, static_cast<Eigen::Index>(t)) = -beta;
        p.senses.push_back(lp::Sense::LessEqual);
        p.senses.push_back(lp::Sense::GreaterEqual);
        p.rhs.push_back(line.flow_limit);
        p.rhs.push_back(-line.flow_limit);

        const double flow = beta * (cand.angles[f] - cand.angles[t]);
        realized += spread * flow;
        overload = std::max(overload, std::abs(flow) - line.flow_limit);
    }
    const auto sol = lp::solve(p);
    if (sol.status != lp::Status::Optimal) return lp::kInf;
    return std::max(0.0, sol.objective - realized);
}

}  // namespace

ResidualReport verify_equilibrium(const Network& net, const ClearingSolution& cand, double lambda) {
    if (cand.dispatch.size() != net.generators.size() || cand.consumption.size() != net.consumers.size() ||
        cand.prices.size() != net.buses.size() || (!cand.angles.empty() && cand.angles.size() != net.buses.size()))
        throw DimensionMismatch("candidate solution does not match the network");
    const bool pool = cand.angles.empty();
    ResidualReport rep;

    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const auto& gen = net.generators[g];
        const double p = cand.prices[net.bus_index(gen.bus)];
        rep.generator_gaps.push_back(box_gap(p - gen.cost, gen.p_min, gen.p_max, cand.dispatch[g]));
    }
    for (std::size_t d = 0; d < net.consumers.size(); ++d) {
        const auto& c = net.consumers[d];
        const double p = cand.prices[net.bus_index(c.bus)];
        rep.consumer_gaps.push_back(
            box_gap(c.utility - p - lambda * c.carbon_cost, c.d_min, c.d_max, cand.consumption[d]));
    }

    double demand = 0.0, emissions = 0.0;
    for (double x : cand.consumption) demand += x;
    for (std::size_t g = 0; g < net.generators.size(); ++g) emissions += net.generators[g].emission * cand.dispatch[g];
    rep.carbon = std::abs(lambda * demand - emissions);

    if (pool) {
        double supply = 0.0;
        for (double x : cand.dispatch) supply += x;
        rep.balance.push_back(demand - supply);
        return rep;
    }

    rep.balance.assign(net.buses.size(), 0.0);
    for (std::size_t d = 0; d < net.consumers.size(); ++d)
        rep.balance[net.bus_index(net.consumers[d].bus)] += cand.consumption[d];
    for (std::size_t g = 0; g < net.generators.size(); ++g)
        rep.balance[net.bus_index(net.generators[g].bus)] -= cand.dispatch[g];
    for (const auto& line : net.lines) {
        const std::size_t f = net.bus_index(line.from);
        const std::size_t t = net.bus_index(line.to);
        const double flow = line.susceptance * (cand.angles[f] - cand.angles[t]);
        rep.balance[f] += flow;
        rep.balance[t] -= flow;
    }
    rep.transmission_gap = transmission_gap(net, cand, rep.line_overload);
    rep.line_overload = std::max(rep.line_overload, 0.0);
    return rep;
}

namespace {

constexpr double kBandTol = 1e-9;

struct Eval {
    double lambda;
    EmissionRange range;

    double low() const { return range.lambda_low - lambda; }
    double high() const { return range.lambda_high - lambda; }
    double mid() const { return 0.5 * (low() + high()); }
    bool contains_zero() const { return low() <= kBandTol && high() >= -kBandTol; }
};

// Lambda-free part of the welfare and the carbon-cost weight; the welfare at
// lambda is welfare0 - lambda * carbon_weight.
double welfare0(const Network& net, const ClearingSolution& s) {
    double w = 0.0;
    for (std::size_t d = 0; d < net.consumers.size(); ++d) w += net.consumers[d].utility * s.consumption[d];
    for (std::size_t g = 0; g < net.generators.size(); ++g) w -= net.generators[g].cost * s.dispatch[g];
    return w;
}

double carbon_weight(const Network& net, const ClearingSolution& s) {
    double c = 0.0;
    for (std::size_t d = 0; d < net.consumers.size(); ++d) c += net.consumers[d].carbon_cost * s.consumption[d];
    return c;
}

ClearingSolution blend(const Network& net, const ClearingSolution& a, const ClearingSolution& b, double t,
                       bool carbon_aware) {
    // a + t (b - a)
    auto mix = [t](const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + t * (y[i] - x[i]);
        return out;
    };
    ClearingSolution s = a;
    s.dispatch = mix(a.dispatch, b.dispatch);
    s.consumption = mix(a.consumption, b.consumption);
    s.angles = mix(a.angles, b.angles);
    s.metrics = compute_metrics(net, s.dispatch, s.consumption, carbon_aware);
    s.lambda = s.metrics.zero_demand ? 0.0 : s.metrics.total_carbon / s.metrics.total_demand;
    return s;
}

class Search {
public:
    Search(const Network& net, const FixedPointOptions& opt)
        : net_(net), opt_(opt), ctx_(net, config(opt)) {}

    EquilibriumCertificate run() {
        double top = 0.0;
        for (const auto& g : net_.generators) top = std::max(top, g.emission);
        if (!(top > 0.0)) {
            auto e = eval(0.0);
            if (!e.contains_zero()) fail("zero-emission network but lambda = 0 is not a fixed point");
            return finish(e);
        }

        const int n = std::max(opt_.scan_points, 2);
        std::vector<Eval> grid;
        grid.reserve(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) grid.push_back(eval(top * k / (n - 1)));

        struct Bracket {
            int left;
            int right;  // == left for a grid point that already contains zero
        };
        std::vector<Bracket> brackets;
        for (int k = 0; k < n; ++k) {
            if (grid[k].contains_zero()) {
                brackets.push_back({k, k});
            } else if (k > 0 && !grid[k - 1].contains_zero() &&
                       std::signbit(grid[k - 1].mid()) != std::signbit(grid[k].mid())) {
                brackets.push_back({k - 1, k});
            }
        }

        std::optional<EquilibriumCertificate> found;
        std::vector<std::pair<double, double>> others;
        for (const auto& b : brackets) {
            if (found) {
                others.emplace_back(grid[b.left].lambda, grid[b.right].lambda);
                continue;
            }
            if (b.left == b.right) {
                found = finish(grid[b.left]);
                continue;
            }
            if (auto e = resolve(grid[b.left], grid[b.right])) found = finish(*e);
        }
        if (!found) fail("the residual band never contains zero on [0, " + std::to_string(top) + "]");
        found->other_brackets = std::move(others);
        found->lambda_trace = trace_;
        found->iterations = evaluations_;
        return *found;
    }

private:
    static ClearingConfig config(const FixedPointOptions& opt) {
        if (!(opt.lambda_tol > 0.0) || !(opt.residual_tol > 0.0) || opt.max_iterations <= 0 || opt.scan_points <= 0)
            throw InvalidConfig("fixed-point options must all be positive");
        ClearingConfig cfg;
        cfg.demand_mode = DemandMode::Flexible;
        cfg.carbon_aware = true;
        cfg.lp = opt.lp;
        return cfg;
    }

    Eval eval(double lambda) {
        ++evaluations_;
        Eval e{lambda, ctx_.emission_range(lambda)};
        trace_.push_back({lambda, e.range.lambda_low, e.range.lambda_high});
        return e;
    }

    [[noreturn]] void fail(const std::string& why) {
        std::string msg = why + "; trace:";
        for (const auto& t : trace_)
            msg += " (" + std::to_string(t.lambda) + ": " + std::to_string(t.lambda_low) + ", " +
                   std::to_string(t.lambda_high) + ")";
        throw NoFixedPointFound(msg);
    }

    // Candidates that land exactly on a fixed point when the bracket has
    // shrunk around it: the ex-post averages of the bracket ends (constant
    // piece) and the welfare tie between the two end solutions (jump).
    std::optional<Eval> polish(const Eval& a, const Eval& b) {
        const double lo = std::min(a.lambda, b.lambda);
        const double hi = std::max(a.lambda, b.lambda);
        const double slack = std::max(opt_.lambda_tol, 1e-12);
        std::vector<double> cand;
        const auto& xa = a.range.primary;
        const auto& xb = b.range.primary;
        const double dc = carbon_weight(net_, xa) - carbon_weight(net_, xb);
        if (std::abs(dc) > 1e-12) cand.push_back((welfare0(net_, xa) - welfare0(net_, xb)) / dc);
        for (const auto* e : {&a, &b}) {
            cand.push_back(e->range.lambda_low);
            cand.push_back(e->range.lambda_high);
        }
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        for (double c : cand) {
            if (!(c >= lo - slack && c <= hi + slack) || c < 0.0) continue;
            auto e = eval(c);
            if (e.contains_zero()) return e;
        }
        return std::nullopt;
    }

    std::optional<Eval> resolve(Eval a, Eval b) {
        const bool a_positive = !std::signbit(a.mid());
        bool polished = false;
        for (int step = 0; step < opt_.max_iterations; ++step) {
            const double width = b.lambda - a.lambda;
            if (width <= opt_.lambda_tol && !polished) {
                polished = true;
                if (auto e = polish(a, b)) return e;
            }
            if (width <= 1e-14 * std::max(1.0, b.lambda)) break;
            auto c = eval(0.5 * (a.lambda + b.lambda));
            if (c.contains_zero()) return c;
            if (!std::signbit(c.mid()) == a_positive) a = std::move(c);
            else b = std::move(c);
        }
        return polish(a, b);
    }

    EquilibriumCertificate finish(const Eval& e) {
        const auto& r = e.range;
        ClearingSolution witness;
        const double span = r.excess_max - r.excess_min;
        if (r.excess_min >= 0.0 || !(span > 0.0)) {
            witness = r.excess_min_witness;
        } else if (r.excess_max <= 0.0) {
            witness = r.excess_max_witness;
        } else {
            // Zero of the (affine) excess E - lambda D on the segment between witnesses.
            const double t = std::clamp(r.excess_max / span, 0.0, 1.0);
            witness = blend(net_, r.excess_max_witness, r.excess_min_witness, t, true);
        }
        witness.prices = r.primary.prices;
        witness.lambda_parameter = e.lambda;

        EquilibriumCertificate cert;
        cert.lambda_star = e.lambda;
        cert.residuals = verify_equilibrium(net_, witness, e.lambda);
        cert.converged = cert.residuals.passes(opt_.residual_tol, witness.metrics.total_demand);
        cert.solution = std::move(witness);
        cert.iterations = evaluations_;
        cert.lambda_trace = trace_;
        return cert;
    }

    const Network& net_;
    FixedPointOptions opt_;
    WelfareClearing ctx_;
    std::vector<TracePoint> trace_;
    int evaluations_ = 0;
};

}  // namespace

EquilibriumCertificate solve_equilibrium(const Network& network, const FixedPointOptions& options) {
    Search search(network, options);
    return search.run();
}

namespace {

std::optional<EquilibriumCertificate> certify_profile(const Network& net, const std::vector<double>& demands,
                                                      const BruteForceOptions& opt) {
    ClearingConfig cfg;
    cfg.demand_mode = DemandMode::FixedAtGiven;
    cfg.given_demands = demands;
    cfg.carbon_aware = true;
    cfg.lp = opt.lp;
    ClearingSolution s;
    try {
        s = clear(net, cfg);
    } catch (const InfeasibleMarket&) {
        return std::nullopt;
    }
    s.lambda_parameter = s.lambda;
    EquilibriumCertificate cert;
    cert.lambda_star = s.lambda;
    cert.residuals = verify_equilibrium(net, s, s.lambda);
    cert.converged = cert.residuals.passes(opt.residual_tol, s.metrics.total_demand);
    if (!cert.converged) {
        // With fixed demand the balance dual is only pinned to an interval
        // when supply sits on a capacity breakpoint. Any dual optimum of the
        // flexible clearing at the profile's own average is complementary
        // to every primal optimum, so it supports the profile if anything does.
        ClearingConfig flex;
        flex.lambda_parameter = s.lambda;
        flex.carbon_aware = true;
        flex.lp = opt.lp;
        const auto reference = clear(net, flex);
        s.prices = reference.prices;
        cert.residuals = verify_equilibrium(net, s, s.lambda);
        cert.converged = cert.residuals.passes(opt.residual_tol, s.metrics.total_demand);
        if (!cert.converged) return std::nullopt;
    }
    cert.solution = std::move(s);
    return cert;
}

// r - p(P) - A(P) c for consumer k when only its own demand varies.
double indifference(const Network& net, std::vector<double> demands, std::size_t k, double level,
                    const BruteForceOptions& opt) {
    demands[k] = level;
    ClearingConfig cfg;
    cfg.demand_mode = DemandMode::FixedAtGiven;
    cfg.given_demands = std::move(demands);
    cfg.lp = opt.lp;
    // Roots often sit on a price jump; a loose balance tolerance would move
    // the jump by up to the tolerance and leave that much generator gap.
    cfg.lp.feasibility = std::min(cfg.lp.feasibility, 1e-11);
    const auto s = clear(net, cfg);
    const auto& c = net.consumers[k];
    return c.utility - s.prices[net.bus_index(c.bus)] - s.lambda * c.carbon_cost;
}

}  // namespace

std::vector<EquilibriumCertificate> brute_force_equilibrium(const Network& net, const BruteForceOptions& opt) {
    require_valid(net);
    const std::size_t nd = net.consumers.size();
    std::vector<std::vector<double>> levels = opt.levels;
    if (levels.empty()) {
        for (const auto& c : net.consumers) {
            std::vector<double> l{c.d_min};
            if (c.d_max != c.d_min) l.push_back(c.d_max);
            levels.push_back(std::move(l));
        }
    }
    if (levels.size() != nd) throw InvalidConfig("brute-force grid needs one level list per consumer");

    // Profiles: the full grid, plus one line search per (consumer, grid of the others).
    double count = 1.0;
    for (const auto& l : levels) {
        if (l.empty()) throw InvalidConfig("empty brute-force level list");
        count *= static_cast<double>(l.size());
    }
    double total = count;
    if (opt.interior)
        for (const auto& l : levels) total += count / static_cast<double>(l.size());
    if (total > static_cast<double>(opt.budget))
        throw TooLarge("brute-force enumeration needs " + std::to_string(static_cast<long long>(total)) +
                       " profiles, budget is " + std::to_string(opt.budget));

    std::vector<EquilibriumCertificate> out;
    auto keep = [&](EquilibriumCertificate cert) {
        for (const auto& o : out) {
            bool same = true;
            for (std::size_t d = 0; d < nd && same; ++d)
                same = std::abs(o.solution.consumption[d] - cert.solution.consumption[d]) <= 1e-6;
            if (same) return;
        }
        out.push_back(std::move(cert));
    };

    // Odometer over the grid, first consumer fastest.
    auto for_each_profile = [&](std::size_t skip, auto&& fn) {
        std::vector<std::size_t> idx(nd, 0);
        for (;;) {
            std::vector<double> demands(nd);
            for (std::size_t d = 0; d < nd; ++d) demands[d] = d == skip ? 0.0 : levels[d][idx[d]];
            fn(demands);
            std::size_t d = 0;
            for (; d < nd; ++d) {
                if (d == skip) continue;
                if (++idx[d] < levels[d].size()) break;
                idx[d] = 0;
            }
            if (d == nd) return;
        }
    };

    for_each_profile(nd, [&](const std::vector<double>& demands) {
        if (auto cert = certify_profile(net, demands, opt)) keep(std::move(*cert));
    });
    if (!opt.interior) return out;

    for (std::size_t k = 0; k < nd; ++k) {
        const auto& c = net.consumers[k];
        if (!(c.d_max > c.d_min)) continue;
        for_each_profile(k, [&](const std::vector<double>& demands) {
            // phi is monotone between price breakpoints but jumps at them, so
            // one sign test over [d_min, d_max] can miss roots. Scan a grid and
            // bisect every sign change; a jump converges onto the breakpoint.
            auto phi = [&](double level) -> std::optional<double> {
                try {
                    return indifference(net, demands, k, level, opt);
                } catch (const InfeasibleMarket&) {
                    return std::nullopt;
                }
            };
            constexpr int kScan = 32;
            std::vector<double> xs;
            std::vector<std::optional<double>> fs;
            for (int i = 0; i <= kScan; ++i) {
                xs.push_back(c.d_min + (c.d_max - c.d_min) * i / kScan);
                fs.push_back(phi(xs.back()));
            }
            auto certify_at = [&](double level) {
                auto profile = demands;
                profile[k] = level;
                if (auto cert = certify_profile(net, profile, opt)) keep(std::move(*cert));
            };
            for (int i = 0; i < kScan; ++i) {
                double lo = xs[i], hi = xs[i + 1];
                auto f_lo = fs[i], f_hi = fs[i + 1];
                if (f_lo && !f_hi) {
                    // Supply runs out inside the cell; its edge is a candidate
                    // where consumers set the price.
                    double a = lo, b = hi;
                    for (int it = 0; it < 200 && b - a > 1e-13 * (1.0 + b); ++it) {
                        const double mid = 0.5 * (a + b);
                        (phi(mid) ? a : b) = mid;
                    }
                    certify_at(a);
                    hi = a;
                    f_hi = phi(a);
                }
                if (!f_lo || !f_hi) continue;
                if (*f_lo == 0.0) certify_at(lo);
                if ((*f_lo == 0.0) != (*f_hi == 0.0)) {
                    // A consumer indifferent over an interval: locate the
                    // interval's edge inside the cell.
                    double zero = *f_lo == 0.0 ? lo : hi, other = *f_lo == 0.0 ? hi : lo;
                    for (int it = 0; it < 200 && std::abs(zero - other) > 1e-13 * (1.0 + std::abs(zero)); ++it) {
                        const double mid = 0.5 * (zero + other);
                        const auto f = phi(mid);
                        (f && *f == 0.0 ? zero : other) = mid;
                    }
                    certify_at(zero);
                    continue;
                }
                if (!(*f_lo > 0.0 && *f_hi < 0.0) && !(*f_lo < 0.0 && *f_hi > 0.0)) continue;
                const bool rising = *f_lo < 0.0;
                for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const auto f = phi(mid);
                    if (!f) break;
                    if ((*f < 0.0) == rising) lo = mid;
                    else hi = mid;
                }
                certify_at(0.5 * (lo + hi));
            }
        });
    }
    return out;
}

}  // namespace carboneq
