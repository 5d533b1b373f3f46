#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "carboneq/cli.hpp"
#include "carboneq/scenario_io.hpp"
#include "json.hpp"

using namespace carboneq;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::initializer_list<std::string> args) {
    std::vector<std::string> store{"carboneq"};
    store.insert(store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : store) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& tag) : dir(fs::temp_directory_path() / ("carboneq_cli_" + tag)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& leaf) const { return (dir / leaf).string(); }
};

}  // namespace

TEST_CASE("format_number") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(48.0) == "48");
    CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("equilibrium run on pool case I") {
    Scratch s("eq");
    const auto r = cli({"run", "--scenario", "threebus_pool_case1", "--method", "equilibrium", "--out", s / "o"});
    REQUIRE(r.code == 0);
    const auto m = read_json(s / "o/metrics.json");
    CHECK(m["metrics"]["average_carbon"].get<double>() == doctest::Approx(0.9125).epsilon(1e-6));
    CHECK(m["metrics"]["total_demand"].get<double>() == doctest::Approx(32.0));
    CHECK(m.contains("tolerances"));
    CHECK(fs::exists(s / "o/dispatch.csv"));
    CHECK(fs::exists(s / "o/consumption.csv"));
    CHECK(fs::exists(s / "o/prices.csv"));
}

TEST_CASE("fixed-demand run on pool case I") {
    Scratch s("mcfd");
    const auto r = cli({"run", "--scenario", "threebus_pool_case1", "--method", "mcfd", "--out", s / "o"});
    REQUIRE(r.code == 0);
    const auto m = read_json(s / "o/metrics.json");
    CHECK(m["metrics"]["total_demand"].get<double>() == doctest::Approx(48.0));
    CHECK(slurp(s / "o/prices.csv") == "bus,mcfd_usd_per_mwh\n1,10\n2,10\n3,10\n");
}

TEST_CASE("repeat runs are byte-identical") {
    Scratch s("repeat");
    for (const char* out : {"a", "b"})
        REQUIRE(cli({"run", "--scenario", "threebus_tx_case1", "--method", "compare", "--out", s / out}).code == 0);
    for (const char* f : {"metrics.json", "dispatch.csv", "consumption.csv", "prices.csv", "comparison.csv"})
        CHECK_MESSAGE(slurp(s / (std::string("a/") + f)) == slurp(s / (std::string("b/") + f)), f);
}

TEST_CASE("carbon costs from a range and from a file") {
    Scratch s("carbon");
    REQUIRE(cli({"run", "--scenario", "threebus_pool_case1", "--method", "equilibrium", "--carbon-range", "0", "0",
                 "--out", s / "zero"})
                .code == 0);
    const auto zero = read_json(s / "zero/metrics.json");
    CHECK(zero["metrics"]["total_demand"].get<double>() == doctest::Approx(48.0));

    std::ofstream(s / "costs.csv") << "consumer_id,carbon_cost_usd_per_ton\nD1,20\nD2,20\nD3,20\n";
    REQUIRE(cli({"run", "--scenario", "threebus_pool_case1", "--method", "equilibrium", "--carbon-file",
                 s / "costs.csv", "--out", s / "file"})
                .code == 0);
    CHECK(read_json(s / "file/metrics.json")["metrics"]["average_carbon"].get<double>() ==
          doctest::Approx(0.9125).epsilon(1e-6));
}

TEST_CASE("a one-point range sweep reproduces the single run") {
    Scratch s("sweep");
    REQUIRE(cli({"sweep", "--scenario", "threebus_pool_case1", "--carbon-range", "20", "20", "--out", s / "sw"}).code ==
            0);
    REQUIRE(cli({"run", "--scenario", "threebus_pool_case1", "--method", "equilibrium", "--carbon-range", "20", "20",
                 "--out", s / "one"})
                .code == 0);
    const std::string table = slurp(s / "sw/sweep.csv");
    CHECK(table.rfind("case,carbon_low,carbon_high,", 0) == 0);
    CHECK(table.find("equilibrium,20,20,32,206,29.2,0.9125,") != std::string::npos);
    const auto one = read_json(s / "one/metrics.json");
    CHECK(one["metrics"]["total_carbon"].get<double>() == doctest::Approx(29.2));
}

TEST_CASE("usage and input errors exit with 1") {
    Scratch s("errors");
    CHECK(cli({}).code == 1);
    CHECK(cli({"run", "--method", "equilibrium"}).code == 1);
    CHECK(cli({"run", "--scenario", "threebus_pool_case1", "--method", "magic", "--out", s / "x"}).code == 1);
    const auto unknown = cli({"run", "--scenario", "no_such_case", "--out", s / "x"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("ERROR UnknownScenario") != std::string::npos);
    CHECK(cli({"sweep", "--scenario", "threebus_pool_case1", "--out", s / "x"}).code == 1);
    CHECK(cli({"run", "--scenario", "threebus_pool_case1", "--carbon-range", "5", "1", "--out", s / "x"}).code == 1);
    std::ofstream(s / "broken.json") << "{ \"format_version\": \"1\",, }";
    CHECK(cli({"run", "--scenario", s / "broken.json", "--out", s / "x"}).code == 1);
}

TEST_CASE("model errors exit with 2") {
    Scratch s("model");
    Scenario sc = builtin_scenario("threebus_pool_case1");
    sc.name = "too_much_demand";
    sc.network.consumers[1].d_min = 70.0;
    sc.network.consumers[1].d_max = 80.0;
    save_scenario(sc, s / "heavy.json");
    const auto r = cli({"run", "--scenario", s / "heavy.json", "--method", "mcfd", "--out", s / "x"});
    CHECK(r.code == 2);
    CHECK(r.err.find("ERROR InfeasibleMarket") != std::string::npos);
}

TEST_CASE("export writes loadable scenarios") {
    Scratch s("export");
    REQUIRE(cli({"export", "threebus_pool_case2", "--out", s / "sc"}).code == 0);
    const Scenario back = load_scenario(s / "sc/threebus_pool_case2.json");
    CHECK(fingerprint(back.network) == fingerprint(builtin_scenario("threebus_pool_case2").network));
}
