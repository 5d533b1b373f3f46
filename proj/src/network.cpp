#include "carboneq/network.hpp"

#include <cmath>
#include <cstring>
#include <set>

#include "carboneq/errors.hpp"

namespace carboneq {

std::size_t Network::bus_index(int bus) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i] == bus) return i;
    throw ValidationFailed("unknown bus " + std::to_string(bus));
}

namespace {

class Collector {
public:
    explicit Collector(std::vector<Violation>& out) : out_(out) {}
    void add(std::string entity, std::string rule, std::string detail) {
        out_.push_back({std::move(entity), std::move(rule), std::move(detail)});
    }

private:
    std::vector<Violation>& out_;
};

bool connected(const Network& net) {
    if (net.buses.empty()) return true;
    std::map<int, std::vector<int>> adj;
    for (const auto& l : net.lines) {
        adj[l.from].push_back(l.to);
        adj[l.to].push_back(l.from);
    }
    std::set<int> seen{net.buses.front()};
    std::vector<int> stack{net.buses.front()};
    while (!stack.empty()) {
        const int b = stack.back();
        stack.pop_back();
        for (int nb : adj[b])
            if (seen.insert(nb).second) stack.push_back(nb);
    }
    for (int b : net.buses)
        if (!seen.count(b)) return false;
    return true;
}

}  // namespace

std::vector<Violation> validate(const Network& net) {
    std::vector<Violation> out;
    Collector v(out);
    const std::set<int> buses(net.buses.begin(), net.buses.end());

    if (net.buses.empty()) v.add("network", "NoBuses", "bus list is empty");
    if (buses.size() != net.buses.size()) v.add("network", "DuplicateId", "bus ids repeat");
    if (!buses.count(net.reference_bus))
        v.add("network", "MissingReferenceBus", "reference bus " + std::to_string(net.reference_bus) + " not listed");

    std::set<std::string> ids;
    for (const auto& g : net.generators) {
        const std::string e = "generator " + g.id;
        if (!ids.insert(g.id).second) v.add(e, "DuplicateId", "generator id repeats");
        if (!buses.count(g.bus)) v.add(e, "DanglingEndpoint", "bus " + std::to_string(g.bus) + " not listed");
        if (!(g.p_min >= 0.0)) v.add(e, "NegativeBound", "p_min must be >= 0");
        if (!(g.p_min <= g.p_max)) v.add(e, "BoundsInverted", "p_min exceeds p_max");
        if (!std::isfinite(g.p_max)) v.add(e, "NonFiniteBound", "p_max must be finite");
        if (!(g.emission >= 0.0) || !std::isfinite(g.emission))
            v.add(e, "NegativeEmission", "emission intensity must be finite and >= 0");
        if (!std::isfinite(g.cost)) v.add(e, "NonFiniteCost", "cost must be finite");
    }
    ids.clear();
    for (const auto& c : net.consumers) {
        const std::string e = "consumer " + c.id;
        if (!ids.insert(c.id).second) v.add(e, "DuplicateId", "consumer id repeats");
        if (!buses.count(c.bus)) v.add(e, "DanglingEndpoint", "bus " + std::to_string(c.bus) + " not listed");
        if (!(c.d_min >= 0.0)) v.add(e, "NegativeBound", "d_min must be >= 0");
        if (!(c.d_min <= c.d_max)) v.add(e, "BoundsInverted", "d_min exceeds d_max");
        if (!std::isfinite(c.d_max)) v.add(e, "NonFiniteBound", "d_max must be finite");
        if (!(c.carbon_cost >= 0.0) || !std::isfinite(c.carbon_cost))
            v.add(e, "NegativeCarbonCost", "carbon cost must be finite and >= 0");
        if (!std::isfinite(c.utility)) v.add(e, "NonFiniteUtility", "utility must be finite");
    }
    ids.clear();
    for (const auto& l : net.lines) {
        const std::string e = "line " + l.id;
        if (!ids.insert(l.id).second) v.add(e, "DuplicateId", "line id repeats");
        if (!buses.count(l.from) || !buses.count(l.to))
            v.add(e, "DanglingEndpoint",
                  "endpoint " + std::to_string(buses.count(l.from) ? l.to : l.from) + " not listed");
        if (l.from == l.to) v.add(e, "SelfLoop", "from_bus equals to_bus");
        if (!(l.flow_limit > 0.0)) v.add(e, "NonPositiveLimit", "flow limit must be > 0");
        if (l.susceptance == 0.0 || !std::isfinite(l.susceptance))
            v.add(e, "ZeroSusceptance", "susceptance must be finite and nonzero");
    }
    if (!net.pool_mode && !connected(net)) v.add("network", "Disconnected", "bus graph is not connected");
    return out;
}

void require_valid(const Network& network) {
    const auto violations = validate(network);
    if (violations.empty()) return;
    std::string msg = std::to_string(violations.size()) + " violation(s):";
    for (const auto& v : violations) msg += " [" + v.rule + " " + v.entity + ": " + v.detail + "]";
    throw ValidationFailed(msg);
}

double total_emissions(const Network& network, std::span<const double> dispatch) {
    if (dispatch.size() != network.generators.size())
        throw MissingGenerator("dispatch has " + std::to_string(dispatch.size()) + " entries for " +
                               std::to_string(network.generators.size()) + " generators");
    double e = 0.0;
    for (std::size_t g = 0; g < dispatch.size(); ++g) e += network.generators[g].emission * dispatch[g];
    return e;
}

double total_emissions(const Network& network, const std::map<std::string, double>& dispatch_by_id) {
    double e = 0.0;
    for (const auto& g : network.generators) {
        const auto it = dispatch_by_id.find(g.id);
        if (it == dispatch_by_id.end()) throw MissingGenerator("no dispatch for generator " + g.id);
        e += g.emission * it->second;
    }
    return e;
}

namespace {

struct Fnv {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void bytes(const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= c[i];
            h *= 0x100000001b3ULL;
        }
    }
    void num(double x) {
        if (x == 0.0) x = 0.0;  // fold -0
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof bits);
        bytes(&bits, sizeof bits);
    }
    void num(std::int64_t x) { bytes(&x, sizeof x); }
    void str(const std::string& s) {
        num(static_cast<std::int64_t>(s.size()));
        bytes(s.data(), s.size());
    }
};

}  // namespace

std::uint64_t fingerprint(const Network& net) {
    Fnv f;
    f.num(static_cast<std::int64_t>(net.pool_mode));
    f.num(static_cast<std::int64_t>(net.reference_bus));
    f.num(static_cast<std::int64_t>(net.buses.size()));
    for (int b : net.buses) f.num(static_cast<std::int64_t>(b));
    f.num(static_cast<std::int64_t>(net.generators.size()));
    for (const auto& g : net.generators) {
        f.str(g.id);
        f.num(static_cast<std::int64_t>(g.bus));
        for (double x : {g.cost, g.p_min, g.p_max, g.emission}) f.num(x);
    }
    f.num(static_cast<std::int64_t>(net.consumers.size()));
    for (const auto& c : net.consumers) {
        f.str(c.id);
        f.num(static_cast<std::int64_t>(c.bus));
        for (double x : {c.utility, c.carbon_cost, c.d_min, c.d_max}) f.num(x);
    }
    f.num(static_cast<std::int64_t>(net.lines.size()));
    for (const auto& l : net.lines) {
        f.str(l.id);
        f.num(static_cast<std::int64_t>(l.from));
        f.num(static_cast<std::int64_t>(l.to));
        f.num(l.susceptance);
        f.num(l.flow_limit);
    }
    return f.h;
}

}  // namespace carboneq
