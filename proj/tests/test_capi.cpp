#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "codedq.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string take(char* s) {
    REQUIRE(s != nullptr);
    std::string out = s;
    cq_string_free(s);
    return out;
}

fs::path fresh_dir(const std::string& tag) {
    static int counter = 0;
    fs::path p = fs::temp_directory_path() /
                 ("codedq-capi-" + tag + "-" + std::to_string(counter++));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("version and error strings") {
    CHECK(std::string(cq_version()) == "0.1.0");
    CHECK(cq_last_error() != nullptr);
}

TEST_CASE("system handle lifecycle") {
    cq_system* sys = nullptr;
    REQUIRE(cq_system_create(R"({"n":64,"k":2,"n_coded":4,"alpha":[0.5,0.5]})",
                             &sys) == CQ_OK);
    REQUIRE(sys != nullptr);
    char* out = nullptr;
    REQUIRE(cq_system_to_json(sys, &out) == CQ_OK);
    json j = json::parse(take(out));
    CHECK(j.at("n") == 64);
    CHECK(j.at("systematic") == json::array({30, 30}));
    cq_system_destroy(sys);

    cq_system* bad = nullptr;
    CHECK(cq_system_create("nonsense", &bad) == CQ_ERR_CONFIG);
    CHECK(bad == nullptr);
    CHECK(std::string(cq_last_error()).size() > 0);
    CHECK(cq_system_create(R"({"n":4,"k":2,"n_coded":9,"alpha":[0.5,0.5]})", &bad) ==
          CQ_ERR_CONFIG);
    cq_system_destroy(nullptr);  // must be a no-op
}

TEST_CASE("capacity membership through the C API") {
    cq_system* sys = nullptr;
    REQUIRE(cq_system_create(R"({"n":64,"k":2,"n_coded":4,"alpha":[0.5,0.5]})",
                             &sys) == CQ_OK);
    double lambda[2] = {33.0, 20.0};
    for (int use_lp : {0, 1}) {
        char* out = nullptr;
        REQUIRE(cq_capacity_membership(sys, lambda, 2, use_lp, &out) == CQ_OK);
        json j = json::parse(take(out));
        CHECK(j.at("uncoded").at("verdict") == "exterior");
        CHECK(j.at("coded").at("verdict") == "interior");
        CHECK(j.at("coded").at("margin").get<double>() > 0.0);
    }
    char* out = nullptr;
    CHECK(cq_capacity_membership(sys, lambda, 1, 0, &out) == CQ_ERR_CONFIG);
    CHECK(out == nullptr);
    CHECK(cq_capacity_membership(nullptr, lambda, 2, 0, &out) == CQ_ERR_CONFIG);
    cq_system_destroy(sys);
}

TEST_CASE("regime classification through the C API") {
    cq_system* sys = nullptr;
    REQUIRE(cq_system_create(R"({"n":1024,"k":2,"n_coded":32,"alpha":[0.5,0.5]})",
                             &sys) == CQ_OK);
    double lambda[2] = {352.0, 320.0};
    char* out = nullptr;
    REQUIRE(cq_classify_regime(sys, lambda, 2, &out) == CQ_OK);
    json j = json::parse(take(out));
    CHECK(j.at("label") == "light");
    CHECK(j.at("istar") == 1);
    CHECK(j.at("kstar").is_null());
    CHECK(j.at("diagnostics").is_object());
    cq_system_destroy(sys);
}

TEST_CASE("preset registry matches the files on disk") {
    char* names_raw = nullptr;
    REQUIRE(cq_preset_names(&names_raw) == CQ_OK);
    json names = json::parse(take(names_raw));
    CHECK(names.size() == 8);

    const char* dir = std::getenv("CQ_PRESET_DIR");
    REQUIRE(dir != nullptr);
    for (const auto& name : names) {
        char* cfg_raw = nullptr;
        REQUIRE(cq_preset_get(name.get<std::string>().c_str(), &cfg_raw) == CQ_OK);
        json embedded = json::parse(take(cfg_raw));

        std::ifstream f(fs::path(dir) / (name.get<std::string>() + ".json"));
        REQUIRE(f.good());
        json on_disk = json::parse(f);
        CHECK(embedded == on_disk);
    }
    char* out = nullptr;
    CHECK(cq_preset_get("does-not-exist", &out) == CQ_ERR_CONFIG);
    CHECK(out == nullptr);
}

TEST_CASE("run_config status codes") {
    auto dir = fresh_dir("status");
    char* out = nullptr;

    CHECK(cq_run_config("{invalid", "", dir.string().c_str(), &out) == CQ_ERR_CONFIG);
    CHECK(out == nullptr);
    CHECK(cq_run_config(nullptr, "", dir.string().c_str(), &out) == CQ_ERR_CONFIG);

    const char* infeasible = R"({
        "command": "route",
        "system": {"n": 10, "k": 2, "n_coded": 2, "alpha": [0.5, 0.5]},
        "lambda": [9.0, 9.0],
        "policy": {"selector": "pseudo_optimal"}
    })";
    CHECK(cq_run_config(infeasible, "", dir.string().c_str(), &out) ==
          CQ_ERR_INFEASIBLE);
    CHECK(std::string(cq_last_error()).find("coded region") != std::string::npos);

    const char* good = R"({
        "command": "regime",
        "system": {"n": 64, "k": 2, "n_coded": 4, "alpha": [0.5, 0.5]},
        "lambda": [20.0, 20.0]
    })";
    REQUIRE(cq_run_config(good, nullptr, dir.string().c_str(), &out) == CQ_OK);
    json j = json::parse(take(out));
    CHECK(j.contains("label"));
    CHECK(std::string(cq_last_error()).empty());
    CHECK(fs::exists(dir / "regime.json"));
}

TEST_CASE("run_preset with overrides") {
    auto dir = fresh_dir("preset");
    char* out = nullptr;
    REQUIRE(cq_run_preset("regime-light", "", dir.string().c_str(), &out) == CQ_OK);
    json j = json::parse(take(out));
    CHECK(j.at("label") == "light");

    CHECK(cq_run_preset("missing", "", dir.string().c_str(), &out) == CQ_ERR_CONFIG);

    // override shrinks the workload so the preset finishes quickly
    auto dir2 = fresh_dir("preset-sim");
    REQUIRE(cq_run_preset("fig2-k2", R"({"seed": 7})", dir2.string().c_str(), &out) ==
            CQ_OK);
    json cap = json::parse(take(out));
    CHECK(cap.at("command") == "capacity");
    CHECK(fs::exists(dir2 / "region.csv"));
    CHECK(fs::exists(dir2 / "boundary.csv"));
}
