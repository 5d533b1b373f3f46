#include "carboneq/scenario_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "carboneq/errors.hpp"
#include "json.hpp"

#ifndef CARBONEQ_DATA_DIR
#define CARBONEQ_DATA_DIR "data"
#endif

namespace carboneq {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// Maps a field path such as "network.lines[2].flow_limit_mw" back to the
// 1-based line where it appears in already-valid JSON text. A path that
// stops existing part way resolves to the deepest enclosing value.
class PathLocator {
public:
    explicit PathLocator(std::string_view text) : t_(text) {}

    std::size_t line(std::string_view path) {
        std::size_t pos = skip_ws(0);
        std::size_t mark = pos;
        while (!path.empty()) {
            if (path.front() == '.') path.remove_prefix(1);
            if (path.front() == '[') {
                const auto close = path.find(']');
                const auto index = std::stoul(std::string(path.substr(1, close - 1)));
                path.remove_prefix(close + 1);
                if (at(pos) != '[') break;
                pos = skip_ws(pos + 1);
                for (std::size_t i = 0; i < index && at(pos) != ']'; ++i) pos = skip_ws(skip_ws(skip_value(pos)) + 1);
                if (at(pos) == ']') break;
                mark = pos;
            } else {
                const auto end = path.find_first_of(".[");
                const auto key = path.substr(0, end);
                path.remove_prefix(end == std::string_view::npos ? path.size() : end);
                if (at(pos) != '{') break;
                std::size_t member = skip_ws(pos + 1);
                bool found = false;
                while (at(member) == '"') {
                    const std::size_t key_end = skip_string(member);
                    const std::size_t value = skip_ws(skip_ws(key_end) + 1);
                    if (t_.substr(member + 1, key_end - member - 2) == key) {
                        mark = member;
                        pos = value;
                        found = true;
                        break;
                    }
                    member = skip_ws(skip_value(value));
                    if (at(member) == ',') member = skip_ws(member + 1);
                }
                if (!found) break;
            }
        }
        return line_of(t_, mark);
    }

private:
    char at(std::size_t pos) const { return pos < t_.size() ? t_[pos] : '\0'; }

    std::size_t skip_ws(std::size_t pos) const {
        while (pos < t_.size() && std::isspace(static_cast<unsigned char>(t_[pos]))) ++pos;
        return pos;
    }

    // Position one past the closing quote.
    std::size_t skip_string(std::size_t pos) const {
        for (++pos; pos < t_.size(); ++pos) {
            if (t_[pos] == '\\') ++pos;
            else if (t_[pos] == '"') return pos + 1;
        }
        return t_.size();
    }

    std::size_t skip_value(std::size_t pos) const {
        if (at(pos) == '"') return skip_string(pos);
        if (at(pos) == '{' || at(pos) == '[') {
            int depth = 0;
            while (pos < t_.size()) {
                const char c = t_[pos];
                if (c == '"') {
                    pos = skip_string(pos);
                    continue;
                }
                if (c == '{' || c == '[') ++depth;
                if ((c == '}' || c == ']') && --depth == 0) return pos + 1;
                ++pos;
            }
            return pos;
        }
        while (pos < t_.size() && std::string_view(",}] \t\r\n").find(t_[pos]) == std::string_view::npos) ++pos;
        return pos;
    }

    std::string_view t_;
};

// Field access with the dotted path kept for error messages.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ParseError(0, path_, "expected an object");
    }

    void allow(std::initializer_list<std::string_view> keys) const {
        for (const auto& [k, v] : j_.items())
            if (std::find(keys.begin(), keys.end(), k) == keys.end())
                throw ParseError(0, at(k), "unknown field");
    }

    bool has(const char* key) const { return j_.contains(key); }

    const json& get(const char* key) const {
        if (!j_.contains(key)) throw ParseError(0, at(key), "missing field");
        return j_.at(key);
    }

    double num(const char* key) const {
        const auto& v = get(key);
        if (!v.is_number()) throw ParseError(0, at(key), "expected a number");
        return v.get<double>();
    }

    double num_or_inf(const char* key) const {
        const auto& v = get(key);
        if (v.is_string() && (v == "inf" || v == "+inf")) return std::numeric_limits<double>::infinity();
        return num(key);
    }

    int integer(const char* key) const {
        const auto& v = get(key);
        if (!v.is_number_integer()) throw ParseError(0, at(key), "expected an integer");
        return v.get<int>();
    }

    std::uint64_t uinteger(const char* key) const {
        const auto& v = get(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw ParseError(0, at(key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string str(const char* key) const {
        const auto& v = get(key);
        if (!v.is_string()) throw ParseError(0, at(key), "expected a string");
        return v.get<std::string>();
    }

    bool boolean(const char* key) const {
        const auto& v = get(key);
        if (!v.is_boolean()) throw ParseError(0, at(key), "expected true or false");
        return v.get<bool>();
    }

    const json& array(const char* key) const {
        const auto& v = get(key);
        if (!v.is_array()) throw ParseError(0, at(key), "expected an array");
        return v;
    }

    std::string at(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

private:
    const json& j_;
    std::string path_;
};

Network parse_network(const Obj& o) {
    o.allow({"buses", "reference_bus", "pool_mode", "generators", "consumers", "lines"});
    Network net;
    const auto& buses = o.array("buses");
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (!buses[i].is_number_integer())
            throw ParseError(0, o.at("buses") + "[" + std::to_string(i) + "]", "expected an integer bus id");
        net.buses.push_back(buses[i].get<int>());
    }
    net.reference_bus = o.integer("reference_bus");
    net.pool_mode = o.boolean("pool_mode");

    const auto& gens = o.array("generators");
    for (std::size_t i = 0; i < gens.size(); ++i) {
        Obj g(gens[i], o.at("generators") + "[" + std::to_string(i) + "]");
        g.allow({"id", "bus", "cost_usd_per_mwh", "p_min_mw", "p_max_mw", "emission_tons_per_mwh"});
        net.generators.push_back({g.str("id"), g.integer("bus"), g.num("cost_usd_per_mwh"), g.num("p_min_mw"),
                                  g.num("p_max_mw"), g.num("emission_tons_per_mwh")});
    }
    const auto& cons = o.array("consumers");
    for (std::size_t i = 0; i < cons.size(); ++i) {
        Obj c(cons[i], o.at("consumers") + "[" + std::to_string(i) + "]");
        c.allow({"id", "bus", "utility_usd_per_mwh", "carbon_cost_usd_per_ton", "d_min_mw", "d_max_mw"});
        net.consumers.push_back({c.str("id"), c.integer("bus"), c.num("utility_usd_per_mwh"),
                                 c.num("carbon_cost_usd_per_ton"), c.num("d_min_mw"), c.num("d_max_mw")});
    }
    const auto& lines = o.array("lines");
    for (std::size_t i = 0; i < lines.size(); ++i) {
        Obj l(lines[i], o.at("lines") + "[" + std::to_string(i) + "]");
        l.allow({"id", "from_bus", "to_bus", "susceptance_mw_per_rad", "flow_limit_mw"});
        net.lines.push_back({l.str("id"), l.integer("from_bus"), l.integer("to_bus"), l.num("susceptance_mw_per_rad"),
                             l.num("flow_limit_mw")});
    }
    return net;
}

CarbonCostSpec parse_carbon(const Obj& o) {
    CarbonCostSpec spec;
    const auto kind = o.str("kind");
    if (kind == "explicit") {
        o.allow({"kind", "values"});
        spec.kind = CarbonCostSpec::Kind::Explicit;
        const auto& vals = o.array("values");
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (!vals[i].is_number())
                throw ParseError(0, o.at("values") + "[" + std::to_string(i) + "]", "expected a number");
            spec.values.push_back(vals[i].get<double>());
        }
    } else if (kind == "uniform_range") {
        o.allow({"kind", "low", "high", "seed"});
        spec.kind = CarbonCostSpec::Kind::UniformRange;
        spec.low = o.num("low");
        spec.high = o.num("high");
        spec.seed = o.uinteger("seed");
        if (!(spec.low >= 0.0 && spec.low <= spec.high))
            throw ParseError(0, o.at("low"), "uniform range needs 0 <= low <= high");
    } else {
        throw ParseError(0, o.at("kind"), "expected \"explicit\" or \"uniform_range\"");
    }
    return spec;
}

ordered_json network_json(const Network& net) {
    ordered_json j;
    j["buses"] = net.buses;
    j["reference_bus"] = net.reference_bus;
    j["pool_mode"] = net.pool_mode;
    j["generators"] = ordered_json::array();
    for (const auto& g : net.generators) {
        ordered_json e;
        e["id"] = g.id;
        e["bus"] = g.bus;
        e["cost_usd_per_mwh"] = g.cost;
        e["p_min_mw"] = g.p_min;
        e["p_max_mw"] = g.p_max;
        e["emission_tons_per_mwh"] = g.emission;
        j["generators"].push_back(std::move(e));
    }
    j["consumers"] = ordered_json::array();
    for (const auto& c : net.consumers) {
        ordered_json e;
        e["id"] = c.id;
        e["bus"] = c.bus;
        e["utility_usd_per_mwh"] = c.utility;
        e["carbon_cost_usd_per_ton"] = c.carbon_cost;
        e["d_min_mw"] = c.d_min;
        e["d_max_mw"] = c.d_max;
        j["consumers"].push_back(std::move(e));
    }
    j["lines"] = ordered_json::array();
    for (const auto& l : net.lines) {
        ordered_json e;
        e["id"] = l.id;
        e["from_bus"] = l.from;
        e["to_bus"] = l.to;
        e["susceptance_mw_per_rad"] = l.susceptance;
        e["flow_limit_mw"] = l.flow_limit;
        j["lines"].push_back(std::move(e));
    }
    return j;
}

}  // namespace

namespace {

Scenario parse_document(const json& doc) {
    Obj root(doc, "");
    const auto& version = root.get("format_version");
    if (!version.is_string() || version.get<std::string>() != kScenarioFormatVersion)
        throw SchemaVersionUnsupported("format_version " + version.dump() + " is not supported (expected \"" +
                                       std::string(kScenarioFormatVersion) + "\")");
    root.allow({"format_version", "name", "provenance", "network", "carbon_cost_spec"});

    Scenario s;
    s.name = root.str("name");
    s.provenance = root.has("provenance") ? root.str("provenance") : "";
    s.network = parse_network(Obj(root.get("network"), "network"));
    if (root.has("carbon_cost_spec")) s.carbon = parse_carbon(Obj(root.get("carbon_cost_spec"), "carbon_cost_spec"));

    auto violations = validate(s.network);
    if (!violations.empty()) {
        std::string msg = "network is invalid:";
        for (const auto& v : violations) msg += " [" + v.rule + " " + v.entity + ": " + v.detail + "]";
        throw ValidationFailed(msg);
    }
    if (s.carbon.kind == CarbonCostSpec::Kind::Explicit && s.carbon.values.size() != s.network.consumers.size())
        throw ParseError(0, "carbon_cost_spec.values", "expected one value per consumer");
    return s;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(line_of(text, e.byte), "", e.what());
    }
    try {
        return parse_document(doc);
    } catch (const ParseError& e) {
        if (e.line() != 0 || e.field().empty()) throw;
        throw ParseError(PathLocator(text).line(e.field()), e.field(), e.message());
    }
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

std::string serialize_scenario(const Scenario& s) {
    ordered_json j;
    j["format_version"] = std::string(kScenarioFormatVersion);
    j["name"] = s.name;
    j["provenance"] = s.provenance;
    j["network"] = network_json(s.network);
    switch (s.carbon.kind) {
        case CarbonCostSpec::Kind::None: break;
        case CarbonCostSpec::Kind::Explicit:
            j["carbon_cost_spec"] = {{"kind", "explicit"}, {"values", s.carbon.values}};
            break;
        case CarbonCostSpec::Kind::UniformRange: {
            ordered_json c;
            c["kind"] = "uniform_range";
            c["low"] = s.carbon.low;
            c["high"] = s.carbon.high;
            c["seed"] = s.carbon.seed;
            j["carbon_cost_spec"] = std::move(c);
            break;
        }
    }
    return j.dump(2) + "\n";
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingFile("cannot write " + path.string());
    out << serialize_scenario(scenario);
}

std::vector<double> sample_uniform(std::size_t count, double low, double high, std::uint64_t seed) {
    if (!(low >= 0.0 && low <= high) || !std::isfinite(high))
        throw InvalidRange("carbon-cost range needs 0 <= low <= high, got [" + std::to_string(low) + ", " +
                           std::to_string(high) + "]");
    std::mt19937_64 rng(seed);
    std::vector<double> out(count);
    for (auto& v : out) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = low + u * (high - low);
    }
    return out;
}

std::vector<double> sample_carbon_costs(std::span<const Consumer> consumers, double low, double high,
                                        std::uint64_t seed) {
    return sample_uniform(consumers.size(), low, high, seed);
}

void apply_carbon_costs(Network& net, const CarbonCostSpec& spec) {
    std::vector<double> values;
    switch (spec.kind) {
        case CarbonCostSpec::Kind::None: return;
        case CarbonCostSpec::Kind::Explicit: values = spec.values; break;
        case CarbonCostSpec::Kind::UniformRange:
            values = sample_carbon_costs(net.consumers, spec.low, spec.high, spec.seed);
            break;
    }
    if (values.size() != net.consumers.size())
        throw InvalidConfig("carbon costs have " + std::to_string(values.size()) + " entries for " +
                            std::to_string(net.consumers.size()) + " consumers");
    for (std::size_t d = 0; d < values.size(); ++d) net.consumers[d].carbon_cost = values[d];
}

Network Scenario::resolved_network() const {
    Network net = network;
    apply_carbon_costs(net, carbon);
    return net;
}

// ---------------------------------------------------------------------------
// RTS-GMLC ingestion

FuelEmissionTable standard_fuel_table() {
    return {{"Natural Gas", 0.6042}, {"NG", 0.6042}, {"Oil", 0.7434}, {"Coal", 0.9606},
            {"Wind", 0.0},           {"Solar", 0.0}, {"Hydro", 0.0}};
}

SnapshotConfig default_rts_snapshot() {
    SnapshotConfig cfg;
    // Non-emitting technologies outside the standard table.
    cfg.fuels["Nuclear"] = 0.0;
    cfg.fuels["Storage"] = 0.0;
    cfg.fuels["Sync_Cond"] = 0.0;
    cfg.capacity_factor = {{"Solar", 0.65}, {"Wind", 0.65}, {"Hydro", 1.0}, {"Storage", 0.0}};
    cfg.cost_model = CostModel::AverageAtMax;
    cfg.utility_low = 40.0;
    cfg.utility_high = 70.0;
    cfg.utility_seed = 2024;
    return cfg;
}

namespace {

struct CsvTable {
    std::filesystem::path path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // rows[i] is file line i + 2

    std::size_t column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError(1, name, path.filename().string() + " lacks column \"" + name + "\"");
        return static_cast<std::size_t>(it - header.begin());
    }

    const std::string& cell(std::size_t row, std::size_t col) const {
        static const std::string empty;
        return col < rows[row].size() ? rows[row][col] : empty;
    }

    double number(std::size_t row, std::size_t col) const {
        const auto& s = cell(row, col);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
            throw ParseError(row + 2, header[col], path.filename().string() + ": \"" + s + "\" is not a number");
        return v;
    }
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile("cannot open " + path.string());
    CsvTable t;
    t.path = path;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "", path.filename().string() + " is empty");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        t.rows.push_back(split_csv_line(line));
    }
    return t;
}

double generator_cost(const CsvTable& t, std::size_t row, double pmax, CostModel model) {
    const std::size_t hr0 = t.column("HR_avg_0");
    if (t.cell(row, hr0).empty() || !(pmax > 0.0)) return 0.0;
    const double price = t.number(row, t.column("Fuel Price $/MMBTU"));
    std::vector<double> pct{t.number(row, t.column("Output_pct_0"))};
    std::vector<double> hr{t.number(row, hr0)};
    for (int k = 1;; ++k) {
        const auto pct_name = "Output_pct_" + std::to_string(k);
        const auto hr_name = "HR_incr_" + std::to_string(k);
        if (std::find(t.header.begin(), t.header.end(), pct_name) == t.header.end()) break;
        const std::size_t pc = t.column(pct_name);
        if (t.cell(row, pc).empty()) break;
        pct.push_back(t.number(row, pc));
        hr.push_back(t.number(row, t.column(hr_name)));
    }
    // Heat rates are BTU/kWh, so HR * $/MMBTU / 1000 is $/MWh.
    if (model == CostModel::MarginalAtMax) return price * hr.back() / 1000.0;
    double total = price * hr[0] / 1000.0 * pct[0] * pmax;
    for (std::size_t k = 1; k < pct.size(); ++k) total += price * hr[k] / 1000.0 * (pct[k] - pct[k - 1]) * pmax;
    return total / (pct.back() * pmax);
}

}  // namespace

Network ingest_rts_gmlc(const std::filesystem::path& dir, const SnapshotConfig& cfg) {
    const auto buses = read_csv(dir / "bus.csv");
    const auto branches = read_csv(dir / "branch.csv");
    const auto gens = read_csv(dir / "gen.csv");

    Network net;
    net.pool_mode = cfg.pool_mode;
    const std::size_t c_bus = buses.column("Bus ID");
    const std::size_t c_type = buses.column("Bus Type");
    const std::size_t c_load = buses.column("MW Load");
    bool have_ref = false;
    std::vector<std::pair<int, double>> loads;
    for (std::size_t r = 0; r < buses.rows.size(); ++r) {
        const int id = static_cast<int>(buses.number(r, c_bus));
        net.buses.push_back(id);
        if (buses.cell(r, c_type) == "Ref") {
            if (have_ref) throw ParseError(r + 2, "Bus Type", "more than one reference bus");
            net.reference_bus = id;
            have_ref = true;
        }
        const double load = buses.number(r, c_load);
        if (load > 0.0) loads.emplace_back(id, load);
    }
    if (!have_ref) throw ParseError(0, "Bus Type", "bus.csv has no \"Ref\" bus");

    const std::size_t b_uid = branches.column("UID");
    const std::size_t b_from = branches.column("From Bus");
    const std::size_t b_to = branches.column("To Bus");
    const std::size_t b_x = branches.column("X");
    const std::size_t b_rating = branches.column("Cont Rating");
    for (std::size_t r = 0; r < branches.rows.size(); ++r) {
        const double x = branches.number(r, b_x);
        if (x == 0.0) throw ParseError(r + 2, "X", "zero reactance");
        net.lines.push_back({branches.cell(r, b_uid), static_cast<int>(branches.number(r, b_from)),
                             static_cast<int>(branches.number(r, b_to)), cfg.base_mva / x,
                             branches.number(r, b_rating)});
    }

    const std::size_t g_uid = gens.column("GEN UID");
    const std::size_t g_bus = gens.column("Bus ID");
    const std::size_t g_fuel = gens.column("Fuel");
    const std::size_t g_pmax = gens.column("PMax MW");
    const std::size_t g_pmin = gens.column("PMin MW");
    for (std::size_t r = 0; r < gens.rows.size(); ++r) {
        const std::string& fuel = gens.cell(r, g_fuel);
        const auto e = cfg.fuels.find(fuel);
        if (e == cfg.fuels.end()) throw UnknownFuel(fuel + " (generator " + gens.cell(r, g_uid) + ")");
        const double rated = gens.number(r, g_pmax);
        const auto cf = cfg.capacity_factor.find(fuel);
        const double pmax = cf == cfg.capacity_factor.end() ? rated : rated * cf->second;
        const double pmin = cfg.respect_pmin ? std::min(gens.number(r, g_pmin), pmax) : 0.0;
        net.generators.push_back({gens.cell(r, g_uid), static_cast<int>(gens.number(r, g_bus)),
                                  generator_cost(gens, r, rated, cfg.cost_model), pmin, pmax, e->second});
    }

    const auto utilities = sample_uniform(loads.size(), cfg.utility_low, cfg.utility_high, cfg.utility_seed);
    for (std::size_t i = 0; i < loads.size(); ++i) {
        const auto [bus, load] = loads[i];
        net.consumers.push_back(
            {"D" + std::to_string(bus), bus, utilities[i], 0.0, cfg.min_demand_fraction * load, load});
    }
    if (net.consumers.size() != cfg.expected_consumers)
        throw ConsumerCountMismatch("found " + std::to_string(net.consumers.size()) + " nonzero loads, expected " +
                                    std::to_string(cfg.expected_consumers));
    require_valid(net);
    return net;
}

// ---------------------------------------------------------------------------
// Built-in scenarios

std::filesystem::path data_directory() { return CARBONEQ_DATA_DIR; }

namespace {

Network three_bus(bool pool, bool case2) {
    Network net;
    net.buses = {1, 2, 3};
    net.reference_bus = 1;
    net.pool_mode = pool;
    const double e1 = 0.6, e2 = case2 ? 1.0 : 0.2, e3 = case2 ? 0.2 : 1.0;
    net.generators = {{"G1", 1, 8.0, 0.0, 20.0, e1}, {"G2", 2, 10.0, 0.0, 10.0, e2}, {"G3", 3, 6.0, 0.0, 25.0, e3}};
    net.consumers = {{"D1", 1, 18.0, 20.0, 4.0, 6.0}, {"D2", 2, 20.0, 20.0, 16.0, 24.0}, {"D3", 3, 21.0, 20.0, 12.0, 18.0}};
    // Equal susceptances; only line 2-3 is limited in the constrained variant.
    const double open = 1000.0;
    net.lines = {{"L12", 1, 2, 100.0, open}, {"L13", 1, 3, 100.0, open}, {"L23", 2, 3, 100.0, pool ? open : 26.0 / 3.0}};
    return net;
}

Scenario three_bus_scenario(std::string name, bool pool, bool case2) {
    Scenario s;
    s.name = std::move(name);
    s.provenance = std::string("Three-bus, three-generator, three-consumer test system; ") +
                   (case2 ? "Case II intensities (costlier units emit more)" : "Case I intensities (costlier units emit less)") +
                   (pool ? "; pool mode, line data unused"
                         : "; reconstructed line data: equal susceptances 100 MW/rad, line 2-3 limited to 26/3 MW so "
                           "it binds under fixed maximum demand");
    s.network = three_bus(pool, case2);
    s.carbon.kind = CarbonCostSpec::Kind::Explicit;
    s.carbon.values = {20.0, 20.0, 20.0};
    return s;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
    return {"threebus_pool_case1", "threebus_pool_case2", "threebus_tx_case1", "threebus_tx_case2", "rts_gmlc"};
}

bool is_builtin_scenario(std::string_view name) {
    const auto names = builtin_scenario_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

Scenario builtin_scenario(std::string_view name) {
    if (name == "threebus_pool_case1") return three_bus_scenario(std::string(name), true, false);
    if (name == "threebus_pool_case2") return three_bus_scenario(std::string(name), true, true);
    if (name == "threebus_tx_case1") return three_bus_scenario(std::string(name), false, false);
    if (name == "threebus_tx_case2") return three_bus_scenario(std::string(name), false, true);
    if (name == "rts_gmlc") {
        Scenario s;
        s.name = "rts_gmlc";
        s.provenance =
            "RTS-GMLC 73-bus system, single-hour snapshot: bus/branch/gen tables in data/rts_gmlc, solar and wind at "
            "65% of rating, hydro at rating, storage off, costs averaged at rated output, consumer utilities uniform "
            "in [40, 70] $/MWh (seed 2024), demand floor 80% of bus load";
        s.network = ingest_rts_gmlc(data_directory() / "rts_gmlc", default_rts_snapshot());
        s.carbon.kind = CarbonCostSpec::Kind::UniformRange;
        s.carbon.low = 10.0;
        s.carbon.high = 100.0;
        s.carbon.seed = 7;
        return s;
    }
    throw UnknownScenario("no built-in scenario named \"" + std::string(name) + "\"");
}

Scenario resolve_scenario(std::string_view name_or_path, std::ostream* warn) {
    const std::filesystem::path path{std::string(name_or_path)};
    if (is_builtin_scenario(name_or_path)) {
        if (warn && std::filesystem::exists(path))
            *warn << "WARNING: \"" << name_or_path << "\" names a built-in scenario and a file; using the built-in\n";
        return builtin_scenario(name_or_path);
    }
    if (std::filesystem::exists(path)) return load_scenario(path);
    throw UnknownScenario("\"" + std::string(name_or_path) + "\" is neither a built-in scenario nor a readable file");
}

}  // namespace carboneq
