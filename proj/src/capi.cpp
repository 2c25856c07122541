#include "codedq.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "capacity.hpp"
#include "commands.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "presets.hpp"
#include "regimes.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

cq_status fail(cq_status code, const std::string& message, char** out) {
    g_last_error = message;
    if (out) *out = nullptr;
    return code;
}

template <typename Fn>
cq_status guarded(char** out, Fn&& fn) {
    if (out) *out = nullptr;
    try {
        std::string result = fn();
        if (out) {
            *out = dup_string(result);
            if (!*out) return fail(CQ_ERR_INTERNAL, "out of memory", out);
        }
        g_last_error.clear();
        return CQ_OK;
    } catch (const codedq::ConfigError& e) {
        return fail(CQ_ERR_CONFIG, e.what(), out);
    } catch (const codedq::InfeasibleError& e) {
        return fail(CQ_ERR_INFEASIBLE, e.what(), out);
    } catch (const codedq::UnstableError& e) {
        return fail(CQ_ERR_INFEASIBLE, e.what(), out);
    } catch (const std::invalid_argument& e) {
        return fail(CQ_ERR_CONFIG, e.what(), out);
    } catch (const std::exception& e) {
        return fail(CQ_ERR_INTERNAL, e.what(), out);
    }
}

nlohmann::json membership_json(const codedq::Membership& m) {
    return {{"verdict", codedq::to_string(m.verdict)}, {"margin", m.margin}};
}

}  // namespace

struct cq_system {
    codedq::SystemSpec spec;
};

extern "C" {

const char* cq_version(void) { return "0.1.0"; }

const char* cq_last_error(void) { return g_last_error.c_str(); }

void cq_string_free(char* s) { std::free(s); }

cq_status cq_run_config(const char* config_json, const char* overrides_json,
                        const char* out_dir, char** out_json) {
    if (!config_json) return fail(CQ_ERR_CONFIG, "config_json is NULL", out_json);
    return guarded(out_json, [&] {
        return codedq::run_config(config_json, overrides_json ? overrides_json : "",
                                  out_dir ? out_dir : ".");
    });
}

cq_status cq_run_preset(const char* name, const char* overrides_json,
                        const char* out_dir, char** out_json) {
    if (!name) return fail(CQ_ERR_CONFIG, "preset name is NULL", out_json);
    std::string cfg = codedq::preset_json(name);
    if (cfg.empty())
        return fail(CQ_ERR_CONFIG, std::string("unknown preset '") + name + "'", out_json);
    return cq_run_config(cfg.c_str(), overrides_json, out_dir, out_json);
}

cq_status cq_preset_names(char** out_json) {
    return guarded(out_json, [] {
        nlohmann::json arr = codedq::preset_names();
        return arr.dump();
    });
}

cq_status cq_preset_get(const char* name, char** out_json) {
    if (!name) return fail(CQ_ERR_CONFIG, "preset name is NULL", out_json);
    std::string cfg = codedq::preset_json(name);
    if (cfg.empty())
        return fail(CQ_ERR_CONFIG, std::string("unknown preset '") + name + "'", out_json);
    return guarded(out_json, [&] { return cfg; });
}

cq_status cq_system_create(const char* json, cq_system** out) {
    if (out) *out = nullptr;
    if (!json || !out) return fail(CQ_ERR_CONFIG, "NULL argument", nullptr);
    char* unused = nullptr;
    cq_status st = guarded(&unused, [&] {
        auto spec = codedq::SystemSpec::from_json(json);
        *out = new cq_system{std::move(spec)};
        return std::string();
    });
    cq_string_free(unused);
    return st;
}

void cq_system_destroy(cq_system* system) { delete system; }

cq_status cq_system_to_json(const cq_system* system, char** out_json) {
    if (!system) return fail(CQ_ERR_CONFIG, "system handle is NULL", out_json);
    return guarded(out_json, [&] { return system->spec.to_json(); });
}

cq_status cq_capacity_membership(const cq_system* system, const double* lambda,
                                 size_t k, int use_lp, char** out_json) {
    if (!system || !lambda) return fail(CQ_ERR_CONFIG, "NULL argument", out_json);
    return guarded(out_json, [&] {
        std::vector<double> l(lambda, lambda + k);
        nlohmann::ordered_json j;
        j["uncoded"] = membership_json(codedq::uncoded_contains(system->spec, l));
        j["coded"] = membership_json(use_lp
                                         ? codedq::coded_contains_lp(system->spec, l)
                                         : codedq::coded_contains_waterfill(system->spec, l));
        return j.dump();
    });
}

cq_status cq_classify_regime(const cq_system* system, const double* lambda,
                             size_t k, char** out_json) {
    if (!system || !lambda) return fail(CQ_ERR_CONFIG, "NULL argument", out_json);
    return guarded(out_json, [&] {
        std::vector<double> l(lambda, lambda + k);
        return codedq::classify_regime(system->spec, l, codedq::RegimeThresholds{})
            .to_json();
    });
}

}  // extern "C"
