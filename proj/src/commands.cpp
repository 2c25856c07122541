#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include <json.hpp>

#include "capacity.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "regimes.hpp"
#include "routing.hpp"
#include "simulator.hpp"

namespace codedq {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void expect_keys(const json& j, std::initializer_list<const char*> allowed,
                 const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (item.key() == a) ok = true;
        if (!ok) throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

SystemSpec parse_system(const json& j, const std::string& where) {
    expect_keys(j, {"n", "k", "n_coded", "alpha"}, where);
    try {
        return build_system(j.at("n").get<int>(), j.at("k").get<int>(),
                            j.at("n_coded").get<int>(),
                            j.at("alpha").get<std::vector<double>>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

std::vector<double> parse_lambda(const json& j, const SystemSpec& system,
                                 const std::string& where) {
    std::vector<double> lambda;
    try {
        lambda = j.get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
    if (static_cast<int>(lambda.size()) != system.k)
        throw ConfigError(where + ": lambda length must equal k");
    return lambda;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << content;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<long long> departures;
    std::optional<int> replications;
};

Overrides parse_overrides(const std::string& text) {
    Overrides o;
    if (text.empty()) return o;
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("overrides: ") + e.what());
    }
    expect_keys(j, {"seed", "departures", "replications"}, "overrides");
    if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("departures")) o.departures = j.at("departures").get<long long>();
    if (j.contains("replications")) o.replications = j.at("replications").get<int>();
    return o;
}

RunConfig parse_run(const json& j, const Overrides& ov) {
    expect_keys(j,
                {"departures", "replications", "seed", "warmup_fraction",
                 "occupancy_cap", "horizon", "trajectory", "trajectory_dt"},
                "run");
    RunConfig cfg;
    cfg.target_departures = j.value("departures", 1000000LL);
    cfg.replications = j.value("replications", 20);
    cfg.seed = j.value("seed", std::uint64_t{42});
    cfg.warmup_fraction = j.value("warmup_fraction", 0.1);
    cfg.occupancy_cap = j.value("occupancy_cap", 1000000LL);
    cfg.horizon = j.value("horizon", 0.0);
    cfg.record_trajectory = j.value("trajectory", false);
    cfg.trajectory_dt = j.value("trajectory_dt", 0.0);
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.departures) cfg.target_departures = *ov.departures;
    if (ov.replications) cfg.replications = *ov.replications;
    if (cfg.target_departures < 1) throw ConfigError("run: departures must be >= 1");
    if (cfg.replications < 1) throw ConfigError("run: replications must be >= 1");
    if (cfg.warmup_fraction < 0.0 || cfg.warmup_fraction >= 1.0)
        throw ConfigError("run: warmup_fraction must be in [0, 1)");
    return cfg;
}

RegimeThresholds parse_thresholds(const json& j) {
    expect_keys(j, {"c_light", "c_inner", "c_heavy", "c_kstar"}, "thresholds");
    RegimeThresholds t;
    t.c_light = j.value("c_light", t.c_light);
    t.c_inner = j.value("c_inner", t.c_inner);
    t.c_heavy = j.value("c_heavy", t.c_heavy);
    t.c_kstar = j.value("c_kstar", t.c_kstar);
    return t;
}

OptimizerConfig parse_optimizer(const json& j, const Overrides& ov) {
    expect_keys(j, {"max_iters", "tol", "fd_step", "seed"}, "optimizer");
    OptimizerConfig cfg;
    cfg.max_iters = j.value("max_iters", cfg.max_iters);
    cfg.tol = j.value("tol", cfg.tol);
    cfg.fd_step = j.value("fd_step", cfg.fd_step);
    cfg.seed = j.value("seed", cfg.seed);
    if (ov.seed) cfg.seed = *ov.seed;
    return cfg;
}

RoutingPolicy resolve_policy(const SystemSpec& system, const std::vector<double>& lambda,
                             const json& pj, const Overrides& ov) {
    expect_keys(pj, {"selector", "policy", "optimizer"}, "policy");
    std::string sel = pj.value("selector", "");
    if (sel == "uncoded_uniform") return uniform_uncoded_policy(system);
    if (sel == "pseudo_optimal")
        return pseudo_optimal_policy(system, lambda,
                                     parse_optimizer(pj.value("optimizer", json::object()), ov));
    if (sel == "heavy_regime") {
        RegimeLabel label = classify_regime(system, lambda, RegimeThresholds{});
        int kstar = label.kstar ? *label.kstar : label.istar;
        return heavy_regime_policy(system, lambda, label.istar, kstar);
    }
    if (sel == "explicit") {
        if (!pj.contains("policy")) throw ConfigError("policy: explicit selector needs 'policy'");
        return RoutingPolicy::from_json(system, pj.at("policy").dump());
    }
    throw ConfigError("policy: unknown selector '" + sel + "'");
}

json stats_to_json(const SimStats& s) {
    ordered_json j;
    j["mean_response"] = s.mean_response;
    if (std::isnan(s.std_error))
        j["std_error"] = nullptr;
    else
        j["std_error"] = s.std_error;
    j["per_type_mean_response"] = s.per_type_mean_response;
    j["mean_jobs_in_system"] = s.mean_jobs_in_system;
    j["departures_counted"] = s.departures_counted;
    return j;
}

SimStats aggregate_stats(const std::vector<SimStats>& runs, int k) {
    SimStats out;
    const int r_count = static_cast<int>(runs.size());
    out.per_type_mean_response.assign(k, 0.0);
    for (const auto& s : runs) {
        out.mean_response += s.mean_response;
        out.mean_jobs_in_system += s.mean_jobs_in_system;
        out.departures_counted += s.departures_counted;
        for (int i = 0; i < k; ++i)
            out.per_type_mean_response[i] += s.per_type_mean_response[i];
    }
    out.mean_response /= r_count;
    out.mean_jobs_in_system /= r_count;
    for (double& v : out.per_type_mean_response) v /= r_count;
    if (r_count >= 2) {
        double ss = 0.0;
        for (const auto& s : runs) {
            double d = s.mean_response - out.mean_response;
            ss += d * d;
        }
        out.std_error = std::sqrt(ss / (r_count - 1)) / std::sqrt(double(r_count));
    } else {
        out.std_error = std::numeric_limits<double>::quiet_NaN();
    }
    out.trajectory = runs.front().trajectory;
    return out;
}

// Exact M/M/1 mixture for the uncoded policy on the system's own counts.
SimStats closed_form_uncoded(const SystemSpec& system, const std::vector<double>& lambda) {
    SimStats s;
    s.std_error = 0.0;
    s.per_type_mean_response.assign(system.k, 0.0);
    double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    for (int i = 0; i < system.k; ++i) {
        double rho = lambda[i] / system.systematic[i];
        if (rho >= 1.0 - kEps)
            throw InfeasibleError("closed_form_uncoded: type " + std::to_string(i + 1) +
                                  " saturates its systematic class");
        s.per_type_mean_response[i] = 1.0 / (1.0 - rho);
        double weight = total > 0.0 ? lambda[i] / total : 1.0 / system.k;
        s.mean_response += weight * s.per_type_mean_response[i];
        s.mean_jobs_in_system += lambda[i] / (1.0 - rho);
    }
    return s;
}

json cmd_capacity(const json& cfg, const std::filesystem::path& out_dir) {
    expect_keys(cfg, {"command", "system", "grid", "boundary_samples"}, "config");
    SystemSpec system = parse_system(cfg.at("system"), "system");
    const json& gj = cfg.at("grid");
    expect_keys(gj, {"lo", "hi", "points"}, "grid");
    GridSpec grid;
    grid.lo = gj.at("lo").get<std::vector<double>>();
    grid.hi = gj.at("hi").get<std::vector<double>>();
    grid.points = gj.at("points").get<std::vector<int>>();

    std::string csv;
    try {
        csv = region_sweep(system, grid);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    write_file(out_dir / "region.csv", csv);
    ordered_json out;
    out["command"] = "capacity";
    out["files"] = {"region.csv"};
    long long rows = std::count(csv.begin(), csv.end(), '\n') - 1;
    out["rows"] = rows;

    if (cfg.contains("boundary_samples")) {
        if (system.k != 2) throw ConfigError("boundary_samples: requires k = 2");
        int m = cfg.at("boundary_samples").get<int>();
        if (m < 2) throw ConfigError("boundary_samples must be >= 2");
        double max1 = system.systematic[0] + system.n_coded;
        std::string bcsv = "lambda_1,lambda_2_max\n";
        for (int i = 0; i < m; ++i) {
            double l1 = max1 * i / (m - 1);
            bcsv += fmt(l1) + "," + fmt(k2_boundary(system, l1)) + "\n";
        }
        write_file(out_dir / "boundary.csv", bcsv);
        out["files"].push_back("boundary.csv");
    }
    return out;
}

json cmd_regime(const json& cfg, const std::filesystem::path& out_dir) {
    expect_keys(cfg, {"command", "system", "lambda", "thresholds"}, "config");
    SystemSpec system = parse_system(cfg.at("system"), "system");
    std::vector<double> lambda = parse_lambda(cfg.at("lambda"), system, "lambda");
    RegimeThresholds t = parse_thresholds(cfg.value("thresholds", json::object()));
    RegimeLabel label = classify_regime(system, lambda, t);
    std::string text = label.to_json();
    write_file(out_dir / "regime.json", text + "\n");
    return json::parse(text);
}

json cmd_route(const json& cfg, const std::filesystem::path& out_dir, const Overrides& ov) {
    expect_keys(cfg, {"command", "system", "lambda", "policy", "optimizer"}, "config");
    SystemSpec system = parse_system(cfg.at("system"), "system");
    std::vector<double> lambda = parse_lambda(cfg.at("lambda"), system, "lambda");
    json pj = cfg.value("policy", json{{"selector", "pseudo_optimal"}});
    if (cfg.contains("optimizer")) pj["optimizer"] = cfg.at("optimizer");
    RoutingPolicy policy = resolve_policy(system, lambda, pj, ov);

    LoadProfile prof = load_profile(system, lambda, policy);
    ApproxObjective obj = approx_mean_response(system, lambda, policy);
    Property41Report prop = check_property_41(system, policy);

    std::string ptext = policy.to_json(system);
    write_file(out_dir / "policy.json", ptext + "\n");
    ordered_json out;
    out["command"] = "route";
    out["policy"] = json::parse(ptext);
    out["objective"] = {{"value", obj.value}, {"per_type", obj.per_type}};
    out["nu"] = prof.nu;
    out["stabilizing"] = policy_is_stabilizing(prof);
    out["property_41_ratio"] = prop.ratio;
    return out;
}

json cmd_simulate(const json& cfg, const std::filesystem::path& out_dir,
                  const Overrides& ov) {
    expect_keys(cfg, {"command", "runs"}, "config");
    if (!cfg.contains("runs") || !cfg.at("runs").is_array() || cfg.at("runs").empty())
        throw ConfigError("simulate: needs a non-empty 'runs' array");

    ordered_json results = ordered_json::array();
    std::string summary = "name,n,n_coded,policy,mean_response,std_error\n";
    std::vector<std::string> files = {"results.json", "summary.csv"};

    for (const json& rj : cfg.at("runs")) {
        expect_keys(rj, {"name", "system", "schedule", "policy", "run"}, "runs[]");
        std::string name = rj.value("name", "run");
        SystemSpec system = parse_system(rj.at("system"), name + ".system");
        RunConfig rcfg = parse_run(rj.value("run", json::object()), ov);
        const json& sj = rj.at("schedule");
        expect_keys(sj, {"type", "lambda", "waves"}, name + ".schedule");
        std::string stype = sj.value("type", "");
        const json& pj = rj.at("policy");
        expect_keys(pj, {"selector", "policy", "optimizer"}, name + ".policy");
        std::string selector = pj.value("selector", "");

        SimStats stats;
        if (stype == "fixed") {
            std::vector<double> lambda =
                parse_lambda(sj.at("lambda"), system, name + ".lambda");
            if (selector == "closed_form_uncoded") {
                stats = closed_form_uncoded(system, lambda);
            } else {
                ArrivalSchedule sched = ArrivalSchedule::make_fixed(lambda);
                RoutingPolicy policy = resolve_policy(system, lambda, pj, ov);
                stats = replicate(system, sched, policy, rcfg);
            }
        } else if (stype == "square_wave") {
            if (selector == "closed_form_uncoded")
                throw ConfigError(name + ": closed form needs a fixed schedule");
            std::vector<SquareWave> waves;
            for (const json& wj : sj.at("waves")) {
                expect_keys(wj, {"low", "high", "period", "high_fraction", "phase_shift"},
                            name + ".wave");
                SquareWave w;
                w.low = wj.at("low").get<double>();
                w.high = wj.at("high").get<double>();
                w.period = wj.at("period").get<double>();
                w.high_fraction = wj.value("high_fraction", 0.5);
                w.phase_shift = wj.value("phase_shift", 0.0);
                waves.push_back(w);
            }
            if (static_cast<int>(waves.size()) != system.k)
                throw ConfigError(name + ": one wave per job type required");
            ArrivalSchedule sched = ArrivalSchedule::make_waves(std::move(waves));

            // One policy per distinct rate phase, computed lazily and cached.
            std::map<std::vector<double>, RoutingPolicy> cache;
            PolicyProvider provider =
                [&](const std::vector<double>& rates) -> const RoutingPolicy& {
                auto it = cache.find(rates);
                if (it == cache.end())
                    it = cache.emplace(rates, resolve_policy(system, rates, pj, ov)).first;
                return it->second;
            };
            std::vector<SimStats> reps;
            for (int r = 0; r < rcfg.replications; ++r)
                reps.push_back(simulate_time_varying(system, sched, provider, rcfg, r));
            stats = aggregate_stats(reps, system.k);
        } else {
            throw ConfigError(name + ": schedule type must be fixed or square_wave");
        }

        if (rcfg.record_trajectory && !stats.trajectory.empty()) {
            std::string fname = "trajectory-" + name + ".csv";
            write_file(out_dir / fname, trajectory_csv(stats, system.k));
            files.push_back(fname);
        }

        ordered_json entry;
        entry["name"] = name;
        entry["n"] = system.n;
        entry["n_coded"] = system.n_coded;
        entry["policy"] = selector;
        entry["stats"] = stats_to_json(stats);
        results.push_back(entry);
        summary += name + "," + std::to_string(system.n) + "," +
                   std::to_string(system.n_coded) + "," + selector + "," +
                   fmt(stats.mean_response) + "," +
                   (std::isnan(stats.std_error) ? "" : fmt(stats.std_error)) + "\n";
    }

    ordered_json doc;
    doc["command"] = "simulate";
    doc["results"] = results;
    write_file(out_dir / "results.json", doc.dump(2) + "\n");
    write_file(out_dir / "summary.csv", summary);
    ordered_json out;
    out["command"] = "simulate";
    out["files"] = files;
    out["results"] = results;
    return out;
}

}  // namespace

std::string run_config(const std::string& config_json, const std::string& overrides_json,
                       const std::string& out_dir) {
    json cfg;
    try {
        cfg = json::parse(config_json);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!cfg.is_object() || !cfg.contains("command"))
        throw ConfigError("config must be an object with a 'command' key");
    Overrides ov = parse_overrides(overrides_json);

    std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string());

    std::string command = cfg.at("command").get<std::string>();
    json out;
    if (command == "capacity")
        out = cmd_capacity(cfg, dir);
    else if (command == "regime")
        out = cmd_regime(cfg, dir);
    else if (command == "route")
        out = cmd_route(cfg, dir, ov);
    else if (command == "simulate")
        out = cmd_simulate(cfg, dir, ov);
    else
        throw ConfigError("unknown command '" + command + "'");
    return out.dump();
}

}  // namespace codedq
