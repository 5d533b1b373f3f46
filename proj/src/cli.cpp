#include "carboneq/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "carboneq/clearing.hpp"
#include "carboneq/equilibrium.hpp"
#include "carboneq/errors.hpp"
#include "carboneq/scenario_io.hpp"
#include "carboneq/sequential.hpp"
#include "json.hpp"

namespace carboneq {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string format_number(double value) {
    if (value == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

namespace {

struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error("UsageError", msg) {}
};

// Model failure that still leaves artifacts behind (e.g. an unconverged certificate).
struct NotConverged : Error {
    explicit NotConverged(const std::string& msg) : Error("NotConverged", msg) {}
};

struct Request {
    std::string scenario;
    std::string method = "equilibrium";
    std::vector<double> range;
    std::vector<std::pair<double, double>> ranges;  // sweep
    std::optional<std::uint64_t> seed;
    std::string carbon_file;
    std::string out = ".";
    std::string format = "all";
    double lambda_tol = 1e-6;
    double residual_tol = 1e-6;
};

class CsvWriter {
public:
    explicit CsvWriter(const fs::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw MissingFile("cannot write " + path.string());
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

void write_json(const fs::path& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingFile("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::vector<double> read_carbon_file(const fs::path& path, const Network& net) {
    std::ifstream in(path);
    if (!in) throw MissingFile("cannot open " + path.string());
    std::map<std::string, double> by_id;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || lineno == 1) continue;  // header: consumer_id,carbon_cost_usd_per_ton
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError(lineno, "carbon_cost_usd_per_ton", "expected two columns");
        const std::string id = line.substr(0, comma);
        const std::string val = line.substr(comma + 1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
        if (ec != std::errc() || ptr != val.data() + val.size())
            throw ParseError(lineno, "carbon_cost_usd_per_ton", "\"" + val + "\" is not a number");
        by_id[id] = v;
    }
    std::vector<double> out;
    for (const auto& c : net.consumers) {
        const auto it = by_id.find(c.id);
        if (it == by_id.end()) throw ParseError(0, "consumer_id", "no carbon cost for consumer " + c.id);
        out.push_back(it->second);
    }
    return out;
}

struct Prepared {
    Scenario scenario;
    Network network;
    CarbonCostSpec carbon;
};

Prepared prepare(const Request& req, std::optional<std::pair<double, double>> range, std::ostream& err) {
    Prepared p;
    p.scenario = resolve_scenario(req.scenario, &err);
    p.carbon = p.scenario.carbon;
    if (range) {
        p.carbon.kind = CarbonCostSpec::Kind::UniformRange;
        p.carbon.low = range->first;
        p.carbon.high = range->second;
        p.carbon.seed = req.seed.value_or(p.scenario.carbon.kind == CarbonCostSpec::Kind::UniformRange
                                              ? p.scenario.carbon.seed
                                              : 0);
        p.carbon.values.clear();
    } else if (!req.carbon_file.empty()) {
        p.carbon.kind = CarbonCostSpec::Kind::Explicit;
        p.carbon.values = read_carbon_file(req.carbon_file, p.scenario.network);
    } else if (req.seed && p.carbon.kind == CarbonCostSpec::Kind::UniformRange) {
        p.carbon.seed = *req.seed;
    }
    p.network = p.scenario.network;
    apply_carbon_costs(p.network, p.carbon);
    return p;
}

ordered_json carbon_json(const CarbonCostSpec& c) {
    ordered_json j;
    switch (c.kind) {
        case CarbonCostSpec::Kind::None: j["kind"] = "scenario"; break;
        case CarbonCostSpec::Kind::Explicit: j["kind"] = "explicit"; j["values"] = c.values; break;
        case CarbonCostSpec::Kind::UniformRange:
            j["kind"] = "uniform_range";
            j["low"] = c.low;
            j["high"] = c.high;
            j["seed"] = c.seed;
            break;
    }
    return j;
}

ordered_json metrics_json(const ClearingSolution& s) {
    const auto& m = s.metrics;
    ordered_json j;
    j["total_generation"] = m.total_generation;
    j["total_generation_cost"] = m.total_generation_cost;
    j["total_carbon"] = m.total_carbon;
    j["average_carbon"] = m.average_carbon;
    j["gross_consumer_utility"] = m.gross_consumer_utility;
    j["total_carbon_cost"] = m.total_carbon_cost;
    j["total_demand"] = m.total_demand;
    j["lambda"] = s.lambda;
    j["zero_demand"] = m.zero_demand;
    return j;
}

ordered_json residual_json(const ResidualReport& r) {
    double g = 0.0, c = 0.0;
    for (double x : r.generator_gaps) g = std::max(g, x);
    for (double x : r.consumer_gaps) c = std::max(c, x);
    ordered_json j;
    j["max_generator_gap"] = g;
    j["max_consumer_gap"] = c;
    j["transmission_gap"] = r.transmission_gap;
    j["line_overload"] = r.line_overload;
    j["max_balance"] = r.max_balance();
    j["carbon"] = r.carbon;
    return j;
}

ordered_json equilibrium_json(const EquilibriumCertificate& eq) {
    ordered_json j;
    j["lambda_star"] = eq.lambda_star;
    j["converged"] = eq.converged;
    j["iterations"] = eq.iterations;
    j["residuals"] = residual_json(eq.residuals);
    j["other_brackets"] = ordered_json::array();
    for (const auto& [a, b] : eq.other_brackets) j["other_brackets"].push_back({a, b});
    return j;
}

ordered_json sequential_json(const Network& net, const SequentialResult& seq) {
    ordered_json j;
    j["lambda_b"] = seq.lambda_b;
    j["lambda_a"] = seq.lambda_a;
    ordered_json d = ordered_json::object();
    for (std::size_t k = 0; k < net.consumers.size(); ++k) d[net.consumers[k].id] = to_string(seq.decisions[k]);
    j["decisions"] = std::move(d);
    return j;
}

struct Column {
    std::string method;
    const ClearingSolution* solution;
};

void write_tables(const fs::path& dir, const Network& net, const std::vector<Column>& cols) {
    {
        CsvWriter w(dir / "dispatch.csv");
        std::vector<std::string> head{"generator_id", "bus"};
        for (const auto& c : cols) head.push_back(c.method + "_mw");
        w.row(head);
        for (std::size_t g = 0; g < net.generators.size(); ++g) {
            std::vector<std::string> r{net.generators[g].id, std::to_string(net.generators[g].bus)};
            for (const auto& c : cols) r.push_back(format_number(c.solution->dispatch[g]));
            w.row(r);
        }
    }
    {
        CsvWriter w(dir / "consumption.csv");
        std::vector<std::string> head{"consumer_id", "bus"};
        for (const auto& c : cols) head.push_back(c.method + "_mw");
        w.row(head);
        for (std::size_t d = 0; d < net.consumers.size(); ++d) {
            std::vector<std::string> r{net.consumers[d].id, std::to_string(net.consumers[d].bus)};
            for (const auto& c : cols) r.push_back(format_number(c.solution->consumption[d]));
            w.row(r);
        }
    }
    {
        CsvWriter w(dir / "prices.csv");
        std::vector<std::string> head{"bus"};
        for (const auto& c : cols) head.push_back(c.method + "_usd_per_mwh");
        w.row(head);
        for (std::size_t b = 0; b < net.buses.size(); ++b) {
            std::vector<std::string> r{std::to_string(net.buses[b])};
            for (const auto& c : cols) r.push_back(format_number(c.solution->prices[b]));
            w.row(r);
        }
    }
}

void write_comparison(const fs::path& dir, const std::vector<Column>& cols) {
    CsvWriter w(dir / "comparison.csv");
    w.row({"metric", "method", "value"});
    const std::vector<std::pair<const char*, double MetricsBundle::*>> fields{
        {"total_generation", &MetricsBundle::total_generation},
        {"total_generation_cost", &MetricsBundle::total_generation_cost},
        {"total_carbon", &MetricsBundle::total_carbon},
        {"average_carbon", &MetricsBundle::average_carbon},
        {"total_carbon_cost", &MetricsBundle::total_carbon_cost},
        {"gross_consumer_utility", &MetricsBundle::gross_consumer_utility},
        {"total_demand", &MetricsBundle::total_demand},
    };
    for (const auto& [name, field] : fields)
        for (const auto& c : cols) w.row({name, c.method, format_number(c.solution->metrics.*field)});
    for (const auto& c : cols) w.row({"lambda", c.method, format_number(c.solution->lambda)});
}

ClearingSolution carbon_agnostic(const Network& net, DemandMode mode) {
    ClearingConfig cfg;
    cfg.demand_mode = mode;
    return clear(net, cfg);
}

FixedPointOptions fixed_point_options(const Request& req) {
    FixedPointOptions o;
    o.lambda_tol = req.lambda_tol;
    o.residual_tol = req.residual_tol;
    return o;
}

struct RunOutcome {
    ordered_json metrics;
    std::optional<ClearingSolution> mcfd, mcdf;
    std::optional<EquilibriumCertificate> eq;
    std::optional<SequentialResult> seq;
};

// Executes one method and writes its artifacts into `dir`.
RunOutcome execute(const Request& req, const Prepared& p, const std::string& method, const fs::path& dir) {
    fs::create_directories(dir);
    const auto& net = p.network;
    RunOutcome o;
    ordered_json& j = o.metrics;
    j["scenario"] = p.scenario.name;
    j["method"] = method;
    j["carbon_costs"] = carbon_json(p.carbon);
    j["tolerances"] = {{"lambda_tol", req.lambda_tol},
                       {"residual_tol", req.residual_tol},
                       {"lp_feasibility", lp::Tolerances{}.feasibility},
                       {"lp_optimality", lp::Tolerances{}.optimality}};

    std::vector<Column> cols;
    const bool all = method == "compare";
    if (method == "mcfd" || all) {
        o.mcfd = carbon_agnostic(net, DemandMode::FixedAtMax);
        cols.push_back({"mcfd", &*o.mcfd});
    }
    if (method == "mcdf" || all) {
        o.mcdf = carbon_agnostic(net, DemandMode::Flexible);
        cols.push_back({"mcdf", &*o.mcdf});
    }
    if (method == "equilibrium" || all) {
        o.eq = solve_equilibrium(net, fixed_point_options(req));
        cols.push_back({"equilibrium", &o.eq->solution});
    }
    if (method == "sequential" || all) {
        SequentialOptions so;
        so.residual_tol = req.residual_tol;
        o.seq = run_sequential(net, so);
        cols.push_back({"sequential", &o.seq->step3});
    }
    if (cols.empty()) throw UsageError("unknown method \"" + method + "\"");

    if (!all) {
        j["metrics"] = metrics_json(*cols.front().solution);
    } else {
        ordered_json m;
        for (const auto& c : cols) m[c.method] = metrics_json(*c.solution);
        j["methods"] = std::move(m);
    }
    if (o.eq) j["equilibrium"] = equilibrium_json(*o.eq);
    if (o.seq) j["sequential"] = sequential_json(net, *o.seq);
    if (all) {
        const auto rep = compare(*o.eq, *o.seq, req.residual_tol);
        ordered_json c;
        c["lambda_star"] = rep.lambda_star;
        c["lambda_b"] = rep.lambda_b;
        c["lambda_a"] = rep.lambda_a;
        c["classification"] = to_string(rep.classification);
        c["differences"] = ordered_json::array();
        for (const auto& d : rep.differences) {
            ordered_json e;
            e["consumer_id"] = net.consumers[d.consumer].id;
            e["equilibrium_mw"] = d.equilibrium;
            e["sequential_mw"] = d.sequential;
            c["differences"].push_back(std::move(e));
        }
        j["comparison"] = std::move(c);
    }

    const bool json_out = req.format == "all" || req.format == "json";
    const bool csv_out = req.format == "all" || req.format == "csv";
    if (json_out) write_json(dir / "metrics.json", j);
    if (csv_out) {
        write_tables(dir, net, cols);
        if (all) write_comparison(dir, cols);
    }
    if (o.eq && !o.eq->converged)
        throw NotConverged("equilibrium residuals exceed residual_tol " + format_number(req.residual_tol) +
                           " (max player gap " + format_number(o.eq->residuals.max_player_gap()) + ")");
    return o;
}

int cmd_run(const Request& req, std::ostream& out, std::ostream& err) {
    std::optional<std::pair<double, double>> range;
    if (!req.range.empty()) range = std::make_pair(req.range[0], req.range[1]);
    const auto p = prepare(req, range, err);
    execute(req, p, req.method, req.out);
    out << "wrote " << req.method << " results for " << p.scenario.name << " to " << req.out << '\n';
    return 0;
}

std::string range_dir(double lo, double hi) { return "range_" + format_number(lo) + "_" + format_number(hi); }

int cmd_sweep(const Request& req, std::ostream& out, std::ostream& err) {
    if (req.ranges.empty()) throw UsageError("sweep needs at least one --carbon-range LOW HIGH");
    fs::create_directories(req.out);
    CsvWriter table(fs::path(req.out) / "sweep.csv");
    table.row({"case", "carbon_low", "carbon_high", "total_generation_mwh", "total_generation_cost_usd",
               "total_carbon_tons", "average_carbon_tons_per_mwh", "gross_consumer_utility_usd",
               "total_carbon_cost_usd"});
    auto emit = [&](const std::string& label, const std::string& lo, const std::string& hi, const ClearingSolution& s) {
        const auto& m = s.metrics;
        table.row({label, lo, hi, format_number(m.total_generation), format_number(m.total_generation_cost),
                   format_number(m.total_carbon), format_number(m.average_carbon),
                   format_number(m.gross_consumer_utility), format_number(m.total_carbon_cost)});
    };

    bool baselines = false;
    bool unconverged = false;
    for (const auto& [lo, hi] : req.ranges) {
        const auto p = prepare(req, std::make_pair(lo, hi), err);
        RunOutcome o;
        try {
            o = execute(req, p, "compare", fs::path(req.out) / range_dir(lo, hi));
        } catch (const NotConverged& e) {
            err << "ERROR " << e.code() << ": range [" << format_number(lo) << ", " << format_number(hi)
                << "]: " << e.what() << '\n';
            unconverged = true;
            continue;
        }
        if (!baselines) {
            emit("MCFD", "", "", *o.mcfd);
            emit("MCDF", "", "", *o.mcdf);
            baselines = true;
        }
        emit("equilibrium", format_number(lo), format_number(hi), o.eq->solution);
    }
    out << "wrote sweep over " << req.ranges.size() << " range(s) to " << req.out << '\n';
    return unconverged ? 2 : 0;
}

int cmd_export(const std::vector<std::string>& names, const std::string& dir, std::ostream& out) {
    fs::create_directories(dir);
    for (const auto& name : names.empty() ? builtin_scenario_names() : names) {
        const auto path = fs::path(dir) / (name + ".json");
        save_scenario(builtin_scenario(name), path);
        out << "wrote " << path.string() << '\n';
    }
    return 0;
}

bool input_error(const Error& e) {
    return dynamic_cast<const ParseError*>(&e) || dynamic_cast<const UsageError*>(&e) ||
           dynamic_cast<const UnknownScenario*>(&e) || dynamic_cast<const InvalidRange*>(&e) ||
           dynamic_cast<const SchemaVersionUnsupported*>(&e) || dynamic_cast<const MissingFile*>(&e) ||
           dynamic_cast<const ValidationFailed*>(&e) || dynamic_cast<const InvalidConfig*>(&e) ||
           dynamic_cast<const UnknownFuel*>(&e) || dynamic_cast<const ConsumerCountMismatch*>(&e);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Carbon-aware electricity market equilibria", "carboneq"};
    app.require_subcommand(1);

    Request req;
    auto add_common = [&req](CLI::App* sub) {
        sub->add_option("--scenario", req.scenario, "Built-in scenario name or scenario JSON path")->required();
        sub->add_option("--carbon-seed,--seed", req.seed, "Seed for uniform carbon-cost sampling");
        sub->add_option("--out", req.out, "Output directory")->capture_default_str();
        sub->add_option("--format", req.format, "Artifacts to write")
            ->check(CLI::IsMember({"all", "json", "csv"}))
            ->capture_default_str();
        sub->add_option("--lambda-tol", req.lambda_tol, "Fixed-point bracket tolerance")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--residual-tol", req.residual_tol, "Equilibrium residual tolerance")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };

    auto* run = app.add_subcommand("run", "Run one method on one scenario");
    add_common(run);
    run->add_option("--method", req.method, "Model to run")
        ->check(CLI::IsMember({"mcfd", "mcdf", "equilibrium", "sequential", "compare"}))
        ->capture_default_str();
    auto* range_opt = run->add_option("--carbon-range", req.range, "Uniform carbon-cost range LOW HIGH ($/ton)")
                          ->expected(2)
                          ->allow_extra_args(false);
    run->add_option("--carbon-file", req.carbon_file, "CSV with consumer_id,carbon_cost_usd_per_ton")
        ->check(CLI::ExistingFile)
        ->excludes(range_opt);

    auto* sweep = app.add_subcommand("sweep", "Equilibrium and sequential runs over several carbon-cost ranges");
    add_common(sweep);
    sweep->add_option("--carbon-range", req.ranges, "Uniform carbon-cost range LOW HIGH; repeat per range")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

    std::vector<std::string> export_names;
    std::string export_dir = "data/scenarios";
    auto* exp = app.add_subcommand("export", "Write built-in scenarios as JSON");
    exp->add_option("names", export_names, "Scenario names (default: all)");
    exp->add_option("--out", export_dir, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(req, out, err);
        if (sweep->parsed()) return cmd_sweep(req, out, err);
        if (exp->parsed()) return cmd_export(export_names, export_dir, out);
    } catch (const Error& e) {
        err << "ERROR " << e.code() << ": " << e.what() << '\n';
        return input_error(e) ? 1 : 2;
    } catch (const std::exception& e) {
        err << "ERROR Internal: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace carboneq
