#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "capacity.hpp"
#include "model.hpp"
#include "regimes.hpp"

using namespace codedq;

namespace {

std::vector<double> k2_lambda(int n, const std::string& regime) {
    double half = n / 2.0;
    double l2 = half - 6.0 * n / 32.0;
    if (regime == "light") return {half - 5.0 * n / 32.0, l2};
    if (regime == "inner") return {half - std::pow(half, 0.55), l2};
    return {half - std::pow(half, 0.3), l2};
}

}  // namespace

TEST_CASE("slack profile") {
    auto sys = build_system(64, 2, 4, {0.5, 0.5});
    auto p = slack_profile(sys, {22.0, 20.0});
    CHECK(p.beta == std::vector<double>{10.0, 12.0});
    CHECK(p.sort_order == std::vector<int>{0, 1});

    auto q = slack_profile(sys, {20.0, 22.0});
    CHECK(q.sort_order == std::vector<int>{1, 0});
    CHECK_THROWS(slack_profile(sys, {1.0}));
}

TEST_CASE("bottleneck index on sorted loads") {
    CHECK(bottleneck_index({0.5, 0.5}) == 1);
    CHECK(bottleneck_index({0.25, 0.25, 0.25, 0.25}) == 1);
    CHECK(bottleneck_index(std::vector<double>(9, 1.0 / 9)) == 2);
    CHECK(bottleneck_index({2.0 / 11, 3.0 / 11, 6.0 / 11}) == 2);
    CHECK(bottleneck_index({0.1, 0.9}) == 1);
    CHECK(bottleneck_index({0.05, 0.15, 0.8}) == 2);
    CHECK_THROWS(bottleneck_index({1.0}));
}

TEST_CASE("bottleneck index grows as small loads shrink") {
    // flattening the low end of the sorted loads never decreases istar
    std::vector<std::vector<double>> chain = {
        {0.30, 0.70},
        {0.20, 0.80},
        {0.05, 0.95},
    };
    int prev = 0;
    for (const auto& a : chain) {
        int cur = bottleneck_index(a);
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("kstar on the reference instances") {
    RegimeThresholds t;
    auto sys = build_system(1024, 2, 32, {0.5, 0.5});
    CHECK(kstar_index(sys, k2_lambda(1024, "inner"), HeavyKind::inner, t) == 1);
    CHECK(kstar_index(sys, k2_lambda(1024, "outer"), HeavyKind::outer, t) == 1);

    // k = 3: both bottleneck types sit within the inner scale
    auto sys3 = build_system(729, 3, 27, {2.0 / 11, 3.0 / 11, 6.0 / 11});
    std::vector<double> lam3 = {
        2.0 / 11 * 729 - std::pow(2.0 / 11 * 729, 0.55),
        3.0 / 11 * 729 - std::pow(3.0 / 11 * 729, 0.65),
        6.0 / 11 * 729 - 9.0 * 729 / 48,
    };
    CHECK(kstar_index(sys3, lam3, HeavyKind::inner, t) == 2);

    // huge slack everywhere: nothing within scale
    CHECK_THROWS(kstar_index(sys, {10.0, 10.0}, HeavyKind::outer, t));
}

TEST_CASE("reference arrival patterns classify as named for n >= 512") {
    RegimeThresholds t;
    for (int n : {512, 1024}) {
        auto sys = build_system(n, 2, 32, {0.5, 0.5});
        CHECK(classify_regime(sys, k2_lambda(n, "light"), t).label == "light");
        auto inner = classify_regime(sys, k2_lambda(n, "inner"), t);
        CHECK(inner.label == "inner_heavy");
        REQUIRE(inner.kstar.has_value());
        CHECK(*inner.kstar == 1);
        CHECK(inner.istar == 1);
        auto outer = classify_regime(sys, k2_lambda(n, "outer"), t);
        CHECK(outer.label == "outer_heavy");
        REQUIRE(outer.kstar.has_value());
        CHECK(*outer.kstar == 1);
    }
}

TEST_CASE("light label survives scaling lambda down") {
    RegimeThresholds t;
    auto sys = build_system(1024, 2, 32, {0.5, 0.5});
    auto lam = k2_lambda(1024, "light");
    for (double f : {1.0, 0.8, 0.5, 0.1, 0.0}) {
        std::vector<double> scaled = {lam[0] * f, lam[1] * f};
        CHECK(classify_regime(sys, scaled, t).label == "light");
    }
}

TEST_CASE("instability labels come from the capacity verdicts") {
    RegimeThresholds t;
    auto sys = build_system(64, 2, 8, {0.5, 0.5});  // s = (28, 28), box edge 32
    auto uu = classify_regime(sys, {33.0, 10.0}, t);
    CHECK(uu.label == "uncoded_unstable");
    CHECK(uu.diagnostics.count("suff_overload_within_n_coded") == 1);

    auto small = build_system(16, 2, 4, {0.5, 0.5});  // s = (6, 6), box edge 8
    CHECK(classify_regime(small, {7.5, 7.5}, t).label == "coded_unstable");
    CHECK(classify_regime(small, {10.0, 10.0}, t).label == "unclassified");
    CHECK(classify_regime(small, {8.0, 4.0}, t).label == "unclassified");
}

TEST_CASE("randomized overload instances satisfy the sufficient condition") {
    RegimeThresholds t;
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        int k = 2 + static_cast<int>(rng() % 3);
        int nc = k + static_cast<int>(rng() % 13);
        int n = 40 * k + nc;
        std::vector<double> alpha(k, 1.0 / k);
        auto sys = build_system(n, k, nc, alpha);

        std::vector<double> lambda(k);
        double beta1 = -(0.05 + 0.25 * u01(rng)) * nc;
        lambda[0] = alpha[0] * n - beta1;
        for (int i = 1; i < k; ++i) {
            double beta = (3.0 + 2.0 * u01(rng)) * nc;
            lambda[i] = std::max(0.0, alpha[i] * n - beta);
        }
        CAPTURE(trial);
        CHECK(uncoded_contains(sys, lambda).verdict == Membership::Verdict::exterior);
        CHECK(coded_contains_waterfill(sys, lambda).verdict ==
              Membership::Verdict::interior);
        CHECK(classify_regime(sys, lambda, t).label == "uncoded_unstable");
    }
}

TEST_CASE("label JSON shape") {
    RegimeThresholds t;
    auto sys = build_system(1024, 2, 32, {0.5, 0.5});
    auto light = classify_regime(sys, k2_lambda(1024, "light"), t);
    std::string j = light.to_json();
    CHECK(j.find("\"label\":\"light\"") != std::string::npos);
    CHECK(j.find("\"kstar\":null") != std::string::npos);
    CHECK(j.find("\"istar\":1") != std::string::npos);
    CHECK(j.find("\"diagnostics\":{") != std::string::npos);

    auto inner = classify_regime(sys, k2_lambda(1024, "inner"), t);
    CHECK(inner.to_json().find("\"kstar\":1") != std::string::npos);
}
