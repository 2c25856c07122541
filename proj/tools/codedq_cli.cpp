#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "codedq.h"

namespace {

std::string preset_list() {
    char* names = nullptr;
    if (cq_preset_names(&names) != CQ_OK) return "[]";
    std::string out = names;
    cq_string_free(names);
    return out;
}

int status_to_exit(cq_status st) {
    switch (st) {
        case CQ_OK: return 0;
        case CQ_ERR_CONFIG: return 2;
        case CQ_ERR_INFEASIBLE: return 3;
        default: return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "codedq: capacity regions, traffic regimes, routing policies and "
        "fork-join simulation for erasure-coded multi-access server systems.\n"
        "Commands are selected by the 'command' key of the config document "
        "(capacity, regime, route, simulate).\n"
        "Built-in presets: " + preset_list()};

    std::string config_path;
    std::string preset;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    long long departures = 0;
    int replications = 0;
    bool have_seed = false;

    auto* config_opt = app.add_option("--config", config_path,
                                      "Path to a JSON experiment config");
    auto* preset_opt = app.add_option("--preset", preset,
                                      "Name of a built-in preset config");
    config_opt->excludes(preset_opt);
    app.add_option("--out", out_dir, "Output directory for artifacts")
        ->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Master seed override (default 42)");
    auto* dep_opt = app.add_option("--departures", departures,
                                   "Override target departures per replication");
    auto* rep_opt = app.add_option("--replications", replications,
                                   "Override replication count");

    CLI11_PARSE(app, argc, argv);
    have_seed = seed_opt->count() > 0;

    if (config_path.empty() && preset.empty()) {
        std::cerr << "error: one of --config or --preset is required\n";
        return 2;
    }

    std::string overrides = "{";
    bool first = true;
    auto append = [&](const std::string& key, const std::string& value) {
        if (!first) overrides += ",";
        overrides += "\"" + key + "\":" + value;
        first = false;
    };
    if (have_seed) append("seed", std::to_string(seed));
    if (dep_opt->count() > 0) append("departures", std::to_string(departures));
    if (rep_opt->count() > 0) append("replications", std::to_string(replications));
    overrides += "}";
    if (first) overrides.clear();

    char* result = nullptr;
    cq_status st;
    if (!preset.empty()) {
        st = cq_run_preset(preset.c_str(), overrides.c_str(), out_dir.c_str(), &result);
    } else {
        std::ifstream f(config_path, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot read " << config_path << "\n";
            return 2;
        }
        std::ostringstream buf;
        buf << f.rdbuf();
        std::string config = buf.str();
        st = cq_run_config(config.c_str(), overrides.c_str(), out_dir.c_str(), &result);
    }

    if (st != CQ_OK) {
        std::cerr << "error: " << cq_last_error() << "\n";
        return status_to_exit(st);
    }
    std::cout << result << "\n";
    cq_string_free(result);
    return 0;
}
