#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "carboneq/errors.hpp"
#include "carboneq/scenario_io.hpp"

using namespace carboneq;
namespace fs = std::filesystem;

namespace {

std::size_t line_containing(const std::string& text, const std::string& needle) {
    const auto pos = text.find(needle);
    REQUIRE(pos != std::string::npos);
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

std::string replace_first(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

// Scratch RTS-layout directory with one reference bus and a loaded bus.
struct MiniRts {
    fs::path dir;

    explicit MiniRts(const std::string& tag, const std::string& fuel = "Coal") {
        dir = fs::temp_directory_path() / ("carboneq_mini_rts_" + tag);
        fs::create_directories(dir);
        write("bus.csv", "Bus ID,Bus Type,MW Load\n1,Ref,0\n2,PQ,85.2\n");
        write("branch.csv", "UID,From Bus,To Bus,X,Cont Rating\nA1,1,2,0.05,175\n");
        write("gen.csv",
              "GEN UID,Bus ID,Fuel,PMax MW,PMin MW,Fuel Price $/MMBTU,Output_pct_0,Output_pct_1,HR_avg_0,HR_incr_1\n"
              "1_STEAM_1,1," + fuel + ",100,30,2,0.5,1,10000,12000\n");
    }
    ~MiniRts() { fs::remove_all(dir); }

    void write(const std::string& name, const std::string& body) const { std::ofstream(dir / name) << body; }

    static SnapshotConfig config(std::size_t consumers = 1) {
        SnapshotConfig c;
        c.expected_consumers = consumers;
        c.utility_low = 40.0;
        c.utility_high = 70.0;
        c.utility_seed = 1;
        return c;
    }
};

}  // namespace

TEST_CASE("built-in scenarios carry the reference emission factors") {
    const auto one = builtin_scenario("threebus_pool_case1").network;
    const auto two = builtin_scenario("threebus_pool_case2").network;
    REQUIRE(one.generators.size() == 3);
    CHECK(one.generators[0].emission == 0.6);
    CHECK(one.generators[1].emission == 0.2);
    CHECK(one.generators[2].emission == 1.0);
    CHECK(two.generators[0].emission == 0.6);
    CHECK(two.generators[1].emission == 1.0);
    CHECK(two.generators[2].emission == 0.2);
    for (const auto& c : builtin_scenario("threebus_pool_case1").resolved_network().consumers) CHECK(c.carbon_cost == 20.0);
    CHECK_THROWS_AS(builtin_scenario("no_such_case"), UnknownScenario);
}

TEST_CASE("serialization is byte-stable and lossless") {
    for (const auto& name : builtin_scenario_names()) {
        const Scenario s = builtin_scenario(name);
        const std::string text = serialize_scenario(s);
        CHECK(text.back() == '\n');
        const Scenario back = parse_scenario(text);
        CHECK(serialize_scenario(back) == text);
        CHECK(fingerprint(back.network) == fingerprint(s.network));
        CHECK(back.name == s.name);
        CHECK(back.provenance == s.provenance);
        CHECK(static_cast<int>(back.carbon.kind) == static_cast<int>(s.carbon.kind));
        CHECK(back.carbon.values == s.carbon.values);
        CHECK(back.carbon.seed == s.carbon.seed);
    }
}

TEST_CASE("save and load through the filesystem") {
    const fs::path path = fs::temp_directory_path() / "carboneq_roundtrip.json";
    Scenario s = builtin_scenario("threebus_tx_case1");
    s.network.generators[0].cost = 0.1 + 0.2;  // not representable in short decimal
    save_scenario(s, path);
    const Scenario back = load_scenario(path);
    CHECK(back.network.generators[0].cost == s.network.generators[0].cost);
    CHECK(fingerprint(back.network) == fingerprint(s.network));
    fs::remove(path);
    CHECK_THROWS_AS(load_scenario(path), MissingFile);
}

TEST_CASE("invalid and malformed files") {
    const std::string text = serialize_scenario(builtin_scenario("threebus_tx_case1"));

    SUBCASE("negative line limit") {
        const auto bad = replace_first(text, "\"flow_limit_mw\": 1000", "\"flow_limit_mw\": -5");
        CHECK_THROWS_AS(parse_scenario(bad), ValidationFailed);
    }
    SUBCASE("unsupported version") {
        const auto bad = replace_first(text, "\"format_version\": \"1\"", "\"format_version\": \"2\"");
        CHECK_THROWS_AS(parse_scenario(bad), SchemaVersionUnsupported);
    }
    SUBCASE("wrong type reports the field and its line") {
        const auto bad = replace_first(text, "\"d_max_mw\": 24.0", "\"d_max_mw\": \"24\"");
        try {
            parse_scenario(bad);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.field() == "network.consumers[1].d_max_mw");
            CHECK(e.line() == line_containing(bad, "\"d_max_mw\": \"24\""));
        }
    }
    SUBCASE("unknown field") {
        const auto bad = replace_first(text, "\"susceptance_mw_per_rad\"", "\"colour\": 1,\n        \"susceptance_mw_per_rad\"");
        try {
            parse_scenario(bad);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.field() == "network.lines[0].colour");
            CHECK(e.line() == line_containing(bad, "\"colour\""));
        }
    }
    SUBCASE("syntax error") {
        const auto bad = replace_first(text, "\"pool_mode\": false,", "\"pool_mode\": false,,");
        try {
            parse_scenario(bad);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == line_containing(bad, ",,"));
        }
    }
}

TEST_CASE("carbon cost sampling") {
    const auto flat = sample_uniform(5, 20.0, 20.0, 9);
    for (double v : flat) CHECK(v == 20.0);
    const auto a = sample_uniform(51, 10.0, 40.0, 42);
    const auto b = sample_uniform(51, 10.0, 40.0, 42);
    const auto c = sample_uniform(51, 10.0, 40.0, 43);
    CHECK(a == b);
    CHECK(a != c);
    for (double v : a) {
        CHECK(v >= 10.0);
        CHECK(v <= 40.0);
    }
    // First draw pinned: mt19937_64(42)() >> 11 scaled to [0, 1).
    CHECK(a[0] == 10.0 + static_cast<double>(std::mt19937_64(42)() >> 11) * 0x1.0p-53 * 30.0);
    CHECK_THROWS_AS(sample_uniform(3, 5.0, 4.0, 1), InvalidRange);
    CHECK_THROWS_AS(sample_uniform(3, -1.0, 4.0, 1), InvalidRange);

    Network n = builtin_scenario("threebus_pool_case1").network;
    CHECK(sample_carbon_costs(n.consumers, 10.0, 40.0, 42) == sample_uniform(3, 10.0, 40.0, 42));
    CarbonCostSpec spec;
    spec.kind = CarbonCostSpec::Kind::Explicit;
    spec.values = {1.0, 2.0};
    CHECK_THROWS_AS(apply_carbon_costs(n, spec), InvalidConfig);
}

TEST_CASE("RTS-GMLC ingest") {
    const Network n = ingest_rts_gmlc(data_directory() / "rts_gmlc", default_rts_snapshot());
    CHECK(n.buses.size() == 73);
    CHECK(n.lines.size() == 120);
    CHECK(n.generators.size() == 158);
    CHECK(n.consumers.size() == 51);
    const auto coal = std::find_if(n.generators.begin(), n.generators.end(),
                                   [](const Generator& g) { return g.id == "101_STEAM_3"; });
    REQUIRE(coal != n.generators.end());
    CHECK(coal->bus == 101);
    CHECK(coal->p_max == 76.0);
    CHECK(coal->emission == 0.9606);
    for (const auto& c : n.consumers) CHECK(c.d_min == doctest::Approx(0.8 * c.d_max));

    // Zero intensity only for fuels that burn nothing.
    std::set<std::string> zero_fuels{"Wind", "Solar", "Hydro", "Nuclear", "Storage", "Sync_Cond"};
    const auto table = default_rts_snapshot().fuels;
    for (const auto& [fuel, e] : table) CHECK((e == 0.0) == (zero_fuels.count(fuel) == 1));

    const Network again = ingest_rts_gmlc(data_directory() / "rts_gmlc", default_rts_snapshot());
    CHECK(fingerprint(again) == fingerprint(n));
}

TEST_CASE("mini RTS layout") {
    MiniRts mini("ok");
    const Network n = ingest_rts_gmlc(mini.dir, MiniRts::config());
    REQUIRE(n.consumers.size() == 1);
    CHECK(n.consumers[0].d_max == 85.2);
    CHECK(n.consumers[0].d_min == doctest::Approx(68.16));
    CHECK(n.lines[0].susceptance == doctest::Approx(2000.0));
    CHECK(n.generators[0].emission == 0.9606);
    CHECK(n.generators[0].p_min == 0.0);
    // Average over the curve: half the output at 10000 BTU/kWh, half at 12000.
    CHECK(n.generators[0].cost == doctest::Approx(22.0));
    auto marginal = MiniRts::config();
    marginal.cost_model = CostModel::MarginalAtMax;
    CHECK(ingest_rts_gmlc(mini.dir, marginal).generators[0].cost == doctest::Approx(24.0));
    CHECK_THROWS_AS(ingest_rts_gmlc(mini.dir, MiniRts::config(51)), ConsumerCountMismatch);
}

TEST_CASE("ingest errors") {
    MiniRts unknown("fuel", "Peat");
    CHECK_THROWS_AS(ingest_rts_gmlc(unknown.dir, MiniRts::config()), UnknownFuel);
    CHECK_THROWS_AS(ingest_rts_gmlc(unknown.dir / "missing", MiniRts::config()), MissingFile);
    MiniRts no_column("column");
    no_column.write("branch.csv", "UID,From Bus,To Bus,R,Cont Rating\nA1,1,2,0.05,175\n");
    CHECK_THROWS_AS(ingest_rts_gmlc(no_column.dir, MiniRts::config()), ParseError);
}

TEST_CASE("scenario resolution prefers built-ins") {
    const fs::path cwd = fs::current_path();
    const fs::path tmp = fs::temp_directory_path() / "carboneq_resolve";
    fs::create_directories(tmp);
    fs::current_path(tmp);
    std::ofstream("threebus_pool_case1") << "{}";
    std::ostringstream warn;
    const Scenario s = resolve_scenario("threebus_pool_case1", &warn);
    CHECK(s.name == "threebus_pool_case1");
    CHECK(warn.str().find("WARNING") != std::string::npos);
    save_scenario(builtin_scenario("threebus_tx_case2"), tmp / "custom.json");
    CHECK(resolve_scenario("custom.json").name == "threebus_tx_case2");
    CHECK_THROWS_AS(resolve_scenario("nothing_here"), UnknownScenario);
    fs::current_path(cwd);
    fs::remove_all(tmp);
}
