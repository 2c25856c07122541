// Acceptance gate: one criterion per invocation (argv[1] in 1..9).
// Prints "criterion N: PASS|FAIL" plus detail lines; exit 0 only on pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "capacity.hpp"
#include "commands.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "presets.hpp"
#include "regimes.hpp"
#include "routing.hpp"
#include "simulator.hpp"

using namespace codedq;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& note) {
        if (!ok) pass = false;
        notes.push_back(std::string(ok ? "ok:   " : "FAIL: ") + note);
    }
    void info(const std::string& note) { notes.push_back("      " + note); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<double> appendix_lambda_k2(int n, const std::string& regime) {
    double half = n / 2.0;
    double l2 = half - 6.0 * n / 32.0;
    if (regime == "light") return {half - 5.0 * n / 32.0, l2};
    if (regime == "inner") return {half - std::pow(half, 0.55), l2};
    return {half - std::pow(half, 0.3), l2};
}

// ---- criterion 1: water-filling vs LP on exhaustive small grids ----------

Check criterion1() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    long long compared = 0, skipped_boundary = 0, mismatches = 0;

    auto sweep = [&](const SystemSpec& sys) {
        std::vector<double> max_l(sys.k);
        for (int i = 0; i < sys.k; ++i)
            max_l[i] = sys.alpha[i] * sys.n + sys.n_coded + 0.5;
        std::vector<int> steps(sys.k);
        for (int i = 0; i < sys.k; ++i)
            steps[i] = static_cast<int>(max_l[i] / 0.25) + 1;
        std::vector<int> idx(sys.k, 0);
        std::vector<double> lambda(sys.k);
        for (;;) {
            for (int i = 0; i < sys.k; ++i) lambda[i] = idx[i] * 0.25;
            Membership wf = coded_contains_waterfill(sys, lambda);
            Membership lp = coded_contains_lp(sys, lambda);
            if (std::abs(wf.margin) <= 2 * kEps || std::abs(lp.margin) <= 2 * kEps) {
                ++skipped_boundary;
            } else {
                ++compared;
                if (wf.verdict != lp.verdict) {
                    if (++mismatches <= 5) {
                        std::string pt;
                        for (double l : lambda) pt += fmt(l) + " ";
                        c.info("mismatch n=" + std::to_string(sys.n) +
                               " nc=" + std::to_string(sys.n_coded) + " lambda=" + pt);
                    }
                }
            }
            int axis = sys.k - 1;
            while (axis >= 0 && ++idx[axis] == steps[axis]) idx[axis--] = 0;
            if (axis < 0) break;
        }
    };

    const std::vector<std::vector<double>> alphas2 = {
        {0.5, 0.5}, {0.3, 0.7}, {0.25, 0.75}};
    for (int n = 4; n <= 16; ++n)
        for (int nc = 0; nc <= 4 && nc <= n - 2; ++nc)
            for (const auto& a : alphas2) {
                try {
                    sweep(build_system(n, 2, nc, a));
                } catch (const std::invalid_argument&) {
                    // a type rounds to zero systematic servers; not a valid system
                }
            }

    const std::vector<std::vector<double>> alphas3 = {
        {1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.2, 0.3, 0.5}};
    for (int n : {6, 9, 12, 16})
        for (int nc = 0; nc <= 4 && nc <= n - 3; ++nc)
            for (const auto& a : alphas3) {
                try {
                    sweep(build_system(n, 3, nc, a));
                } catch (const std::invalid_argument&) {
                }
            }

    double dt = seconds_since(t0);
    c.info("compared " + std::to_string(compared) + " grid points, skipped " +
           std::to_string(skipped_boundary) + " near the boundary");
    c.require(mismatches == 0,
              "water-filling and LP verdicts agree (" + std::to_string(mismatches) +
                  " mismatches)");
    c.require(dt < 60.0, "runtime " + fmt(dt) + " s < 60 s");
    return c;
}

// ---- criterion 2: closed-form k=2 boundary vs bisection -------------------

Check criterion2() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    auto sys = build_system(64, 2, 4, {0.5, 0.5});
    double max1 = sys.systematic[0] + sys.n_coded;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        double l1 = max1 * i / 99.0;
        double closed = k2_boundary(sys, l1);
        double lo = 0.0, hi = sys.n + 1.0;
        while (hi - lo > 1e-9) {
            double mid = 0.5 * (lo + hi);
            if (coded_contains_waterfill(sys, {l1, mid}).margin >= -kEps)
                lo = mid;
            else
                hi = mid;
        }
        worst = std::max(worst, std::abs(closed - 0.5 * (lo + hi)));
    }
    double dt = seconds_since(t0);
    c.require(worst < 1e-6, "max |closed form - bisection| = " + fmt(worst) + " < 1e-6");
    c.require(dt < 5.0, "runtime " + fmt(dt) + " s < 5 s");
    return c;
}

// ---- criterion 3: M/M/1 exactness with replication-spread sanity ----------

Check criterion3() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    auto sys = build_system(2, 2, 0, {0.5, 0.5});
    auto pol = uniform_uncoded_policy(sys);
    for (double rho : {0.5, 0.8, 0.95}) {
        double truth = 1.0 / (1.0 - rho);
        RunConfig cfg;
        cfg.target_departures = 1000000;
        cfg.replications = 20;
        cfg.seed = 42;
        auto sched = ArrivalSchedule::make_fixed({rho, 0.0});
        std::vector<double> means;
        for (int r = 0; r < 20; ++r)
            means.push_back(simulate(sys, sched, pol, cfg, r).mean_response);
        double grand = 0.0;
        for (double m : means) grand += m;
        grand /= means.size();
        double ss = 0.0;
        for (double m : means) ss += (m - grand) * (m - grand);
        double s = std::sqrt(ss / (means.size() - 1));
        double q = 0.0;
        for (double m : means) q += (m - truth) * (m - truth) / (s * s);
        c.require(std::abs(grand - truth) <= 0.02 * truth,
                  "rho=" + fmt(rho) + ": mean " + fmt(grand) + " within 2% of " +
                      fmt(truth));
        c.require(q >= 9.59 && q <= 34.17,
                  "rho=" + fmt(rho) + ": chi-square statistic " + fmt(q) +
                      " in [9.59, 34.17]");
    }
    double dt = seconds_since(t0);
    c.require(dt < 120.0, "runtime " + fmt(dt) + " s < 120 s");
    return c;
}

// ---- criterion 4: uncoded system vs the exact M/M/1 mixture ---------------

Check criterion4() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    auto sys = build_system(64, 2, 0, {0.5, 0.5});  // s = (32, 32)
    std::vector<double> lambda = {22.0, 20.0};
    double truth = (22.0 / 42.0) / (1.0 - 22.0 / 32.0) +
                   (20.0 / 42.0) / (1.0 - 20.0 / 32.0);
    c.info("closed-form mean response " + fmt(truth));
    RunConfig cfg;
    cfg.target_departures = 1000000;
    cfg.replications = 20;
    cfg.seed = 42;
    auto stats = replicate(sys, ArrivalSchedule::make_fixed(lambda),
                           uniform_uncoded_policy(sys), cfg);
    c.require(std::abs(stats.mean_response - truth) <= 0.02 * truth,
              "simulated " + fmt(stats.mean_response) + " within 2% of " + fmt(truth));
    double dt = seconds_since(t0);
    c.require(dt < 120.0, "runtime " + fmt(dt) + " s < 120 s");
    return c;
}

// ---- criterion 5: isolated fork-join jobs vs harmonic numbers -------------

Check criterion5() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    for (int k : {2, 3}) {
        auto sys = build_system(8 * k, k, k, std::vector<double>(k, 1.0 / k));
        RecoveryPattern all_coded{0, k, {}};
        double truth = expected_max_exponentials(std::vector<double>(k, 1.0));
        double mean = run_isolated_jobs(sys, all_coded, 100000, 42).mean_response;
        c.require(std::abs(mean - truth) <= 0.01 * truth,
                  "k=" + std::to_string(k) + ": isolated mean " + fmt(mean) +
                      " within 1% of H_k = " + fmt(truth));
    }
    double dt = seconds_since(t0);
    c.require(dt < 30.0, "runtime " + fmt(dt) + " s < 30 s");
    return c;
}

// ---- criterion 6: desk-scale trend checks ---------------------------------

Check criterion6() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    const std::vector<int> ns = {64, 128, 256, 512};

    auto uncoded_mean = [](int n, const std::vector<double>& lambda) {
        auto sys = build_system(n, 2, 0, {0.5, 0.5});
        double total = lambda[0] + lambda[1], mean = 0.0;
        for (int i = 0; i < 2; ++i) {
            double rho = lambda[i] / sys.systematic[i];
            mean += (lambda[i] / total) / (1.0 - rho);
        }
        return mean;
    };
    auto coded_mean = [&](int n, const std::vector<double>& lambda) {
        int nc = static_cast<int>(std::ceil(std::sqrt(double(n))));
        auto sys = build_system(n, 2, nc, {0.5, 0.5});
        auto policy = pseudo_optimal_policy(sys, lambda);
        RunConfig cfg;
        cfg.target_departures = 1000000;
        cfg.replications = 20;
        cfg.seed = 42;
        auto stats = replicate(sys, ArrivalSchedule::make_fixed(lambda), policy, cfg);
        return stats.mean_response;
    };

    std::map<std::string, std::vector<double>> unc, cod;
    for (const std::string regime : {"light", "inner", "outer"}) {
        for (int n : ns) {
            auto lambda = appendix_lambda_k2(n, regime);
            unc[regime].push_back(uncoded_mean(n, lambda));
            cod[regime].push_back(coded_mean(n, lambda));
            std::fprintf(stderr, "  [criterion 6] %s n=%d uncoded=%.4f coded=%.4f\n",
                         regime.c_str(), n, unc[regime].back(), cod[regime].back());
        }
    }

    // light: |coded - uncoded| decreasing in n and < 0.05 at n = 512
    {
        std::vector<double> diff;
        for (std::size_t i = 0; i < ns.size(); ++i)
            diff.push_back(std::abs(cod["light"][i] - unc["light"][i]));
        std::string seq;
        for (double d : diff) seq += fmt(d) + " ";
        c.info("light |coded-uncoded|: " + seq);
        bool mono = true;
        for (std::size_t i = 1; i < diff.size(); ++i)
            if (diff[i] >= diff[i - 1]) mono = false;
        c.require(mono, "light gap decreases monotonically in n");
        c.require(diff.back() < 0.05,
                  "light gap at n=512 is " + fmt(diff.back()) + " < 0.05");
    }
    // inner-heavy: coded < uncoded everywhere, gap non-decreasing
    {
        std::vector<double> gap;
        for (std::size_t i = 0; i < ns.size(); ++i)
            gap.push_back(unc["inner"][i] - cod["inner"][i]);
        std::string seq;
        for (double g : gap) seq += fmt(g) + " ";
        c.info("inner uncoded-coded gap: " + seq);
        bool below = true;
        for (double g : gap)
            if (g <= 0.0) below = false;
        c.require(below, "inner-heavy: coded beats uncoded at every n");
        bool nondec = true;
        for (std::size_t i = 1; i < gap.size(); ++i)
            if (gap[i] < gap[i - 1]) nondec = false;
        c.require(nondec, "inner-heavy gap is non-decreasing in n");
    }
    // outer-heavy: coded/uncoded ratio decreasing, < 0.5 at n = 512
    {
        std::vector<double> ratio;
        for (std::size_t i = 0; i < ns.size(); ++i)
            ratio.push_back(cod["outer"][i] / unc["outer"][i]);
        std::string seq;
        for (double r : ratio) seq += fmt(r) + " ";
        c.info("outer coded/uncoded ratio: " + seq);
        bool mono = true;
        for (std::size_t i = 1; i < ratio.size(); ++i)
            if (ratio[i] >= ratio[i - 1]) mono = false;
        c.require(mono, "outer-heavy ratio decreases monotonically in n");
        c.require(ratio.back() < 0.5,
                  "outer-heavy ratio at n=512 is " + fmt(ratio.back()) + " < 0.5");
    }
    double dt = seconds_since(t0);
    c.require(dt < 1800.0, "runtime " + fmt(dt) + " s < 30 min");
    return c;
}

// ---- criterion 7: instability demonstrations in both directions -----------

Check criterion7() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();

    // uncoded-unstable point: type 1 overloads its class but coding absorbs it
    {
        auto sys = build_system(64, 2, 8, {0.5, 0.5});  // s = (28, 28)
        std::vector<double> lambda = {32.5, 16.0};
        c.require(uncoded_contains(sys, lambda).verdict == Membership::Verdict::exterior,
                  "demo point is outside the uncoded region");
        c.require(coded_contains_waterfill(sys, lambda).verdict ==
                      Membership::Verdict::interior,
                  "demo point is inside the coded region");
        RunConfig cfg;
        cfg.target_departures = 100000000;
        cfg.replications = 1;
        cfg.seed = 42;
        cfg.occupancy_cap = 5000;
        bool blew_up = false;
        try {
            simulate(sys, ArrivalSchedule::make_fixed(lambda),
                     uniform_uncoded_policy(sys), cfg, 0);
        } catch (const UnstableError&) {
            blew_up = true;
        }
        c.require(blew_up, "uniform uncoded routing hits the occupancy cap");

        cfg.target_departures = 200000;
        cfg.occupancy_cap = 1000000;
        auto policy = pseudo_optimal_policy(sys, lambda);
        bool stable = true;
        double mean = 0.0;
        try {
            mean = simulate(sys, ArrivalSchedule::make_fixed(lambda), policy, cfg, 0)
                       .mean_response;
        } catch (const UnstableError&) {
            stable = false;
        }
        c.require(stable, "pseudo-optimal routing runs stably (mean response " +
                              fmt(mean) + ")");
    }

    // coded-unstable point: all-coded forced routing collapses, uncoded is fine
    {
        auto sys = build_system(16, 2, 4, {0.5, 0.5});  // s = (6, 6)
        std::vector<double> lambda = {7.5, 7.5};
        c.require(uncoded_contains(sys, lambda).verdict == Membership::Verdict::interior,
                  "demo point is inside the uncoded region");
        c.require(coded_contains_waterfill(sys, lambda).verdict ==
                      Membership::Verdict::exterior,
                  "demo point is outside the coded region");

        RoutingPolicy all_coded = uniform_uncoded_policy(sys);
        for (int i = 0; i < 2; ++i) {
            std::fill(all_coded.probs[i].begin(), all_coded.probs[i].end(), 0.0);
            // last canonical pattern is the k-task all-coded one
            all_coded.probs[i].back() = 1.0;
        }
        RunConfig cfg;
        cfg.target_departures = 100000000;
        cfg.replications = 1;
        cfg.seed = 42;
        cfg.occupancy_cap = 5000;
        bool blew_up = false;
        try {
            simulate(sys, ArrivalSchedule::make_fixed(lambda), all_coded, cfg, 0);
        } catch (const UnstableError&) {
            blew_up = true;
        }
        c.require(blew_up, "forced k-task routing hits the occupancy cap");

        auto unc_sys = build_system(16, 2, 0, {0.5, 0.5});  // s = (8, 8)
        cfg.target_departures = 200000;
        cfg.occupancy_cap = 1000000;
        bool stable = true;
        try {
            simulate(unc_sys, ArrivalSchedule::make_fixed(lambda),
                     uniform_uncoded_policy(unc_sys), cfg, 0);
        } catch (const UnstableError&) {
            stable = false;
        }
        c.require(stable, "the all-systematic system absorbs the same demand");
    }
    double dt = seconds_since(t0);
    c.require(dt < 120.0, "runtime " + fmt(dt) + " s < 120 s");
    return c;
}

// ---- criterion 8: time-varying occupancy peaks ----------------------------

Check criterion8() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    auto waves = ArrivalSchedule::make_waves(
        {{6.0, 18.0, 2000.0, 0.5, 0.0}, {12.0, 30.0, 2000.0, 0.6, 900.0}});

    auto coded_sys = build_system(60, 2, 7, {22.0 / 53, 31.0 / 53});
    auto unc_sys = build_system(60, 2, 0, {26.0 / 60, 34.0 / 60});
    auto unc_policy = uniform_uncoded_policy(unc_sys);

    std::map<std::vector<double>, RoutingPolicy> cache;
    PolicyProvider coded_provider =
        [&](const std::vector<double>& rates) -> const RoutingPolicy& {
        auto it = cache.find(rates);
        if (it == cache.end())
            it = cache.emplace(rates, pseudo_optimal_policy(coded_sys, rates)).first;
        return it->second;
    };
    PolicyProvider unc_provider =
        [&](const std::vector<double>&) -> const RoutingPolicy& { return unc_policy; };

    double peak_ratio_sum = 0.0;
    int coded_avg_lower = 0;
    for (int seed = 0; seed < 5; ++seed) {
        RunConfig cfg;
        cfg.horizon = 4000.0;  // two full periods, the window the comparison targets
        cfg.seed = 42 + seed;
        cfg.record_trajectory = true;
        cfg.trajectory_dt = 5.0;
        auto coded = simulate_time_varying(coded_sys, waves, coded_provider, cfg, 0);
        auto unc = simulate_time_varying(unc_sys, waves, unc_provider, cfg, 0);
        auto peak = [](const SimStats& s) {
            long long p = 0;
            for (const auto& pt : s.trajectory) p = std::max(p, pt.total);
            return double(p);
        };
        double pc = peak(coded), pu = peak(unc);
        peak_ratio_sum += pu / pc;
        if (coded.mean_jobs_in_system < unc.mean_jobs_in_system) ++coded_avg_lower;
        c.info("seed " + std::to_string(42 + seed) + ": peaks coded=" + fmt(pc) +
               " uncoded=" + fmt(pu) + ", time-avg coded=" +
               fmt(coded.mean_jobs_in_system) + " uncoded=" +
               fmt(unc.mean_jobs_in_system));
    }
    double avg_ratio = peak_ratio_sum / 5.0;
    c.require(avg_ratio >= 1.25, "uncoded peak exceeds coded peak by >= 25% on "
                                 "average (ratio " + fmt(avg_ratio) + ")");
    c.require(coded_avg_lower == 5, "coded time-average occupancy lower on all seeds");
    double dt = seconds_since(t0);
    c.require(dt < 300.0, "runtime " + fmt(dt) + " s < 300 s");
    return c;
}

// ---- criterion 9: byte-identical artifacts across repeated runs -----------

Check criterion9() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    const std::string overrides = R"({"departures": 2000, "replications": 2})";

    for (const auto& name : preset_names()) {
        fs::path base = fs::temp_directory_path() / ("codedq-accept9-" + name);
        fs::path d1 = base / "a", d2 = base / "b";
        fs::remove_all(base);
        fs::create_directories(d1);
        fs::create_directories(d2);

        std::string cfg = preset_json(name);
        std::string r1 = run_config(cfg, overrides, d1.string());
        std::string r2 = run_config(cfg, overrides, d2.string());
        bool identical = r1 == r2;
        for (const auto& entry : fs::directory_iterator(d1)) {
            fs::path other = d2 / entry.path().filename();
            if (!fs::exists(other)) {
                identical = false;
                break;
            }
            std::ifstream f1(entry.path(), std::ios::binary);
            std::ifstream f2(other, std::ios::binary);
            std::ostringstream b1, b2;
            b1 << f1.rdbuf();
            b2 << f2.rdbuf();
            if (b1.str() != b2.str()) identical = false;
        }
        c.require(identical, "preset " + name + " reproduces byte-identical output");
        fs::remove_all(base);
    }
    double dt = seconds_since(t0);
    c.info("runtime " + fmt(dt) + " s");
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1..9>\n");
        return 2;
    }
    int n = std::atoi(argv[1]);
    Check (*checks[])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                           criterion6, criterion7, criterion8, criterion9};
    if (n < 1 || n > 9) {
        std::fprintf(stderr, "usage: acceptance <criterion 1..9>\n");
        return 2;
    }
    Check c = checks[n - 1]();
    std::printf("criterion %d: %s\n", n, c.pass ? "PASS" : "FAIL");
    for (const auto& note : c.notes) std::printf("  %s\n", note.c_str());
    return c.pass ? 0 : 1;
}
