#include "routing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "capacity.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "regimes.hpp"

namespace codedq {

namespace {

std::vector<std::vector<RecoveryPattern>> all_patterns(const SystemSpec& system) {
    std::vector<std::vector<RecoveryPattern>> out(system.k);
    for (int i = 0; i < system.k; ++i)
        out[i] = enumerate_recovery_patterns(system, i);
    return out;
}

void check_policy_shape(const SystemSpec& system,
                        const std::vector<std::vector<RecoveryPattern>>& patterns,
                        const RoutingPolicy& policy) {
    if (static_cast<int>(policy.probs.size()) != system.k)
        throw ConfigError("policy: type count mismatch");
    for (int i = 0; i < system.k; ++i) {
        if (policy.probs[i].size() != patterns[i].size())
            throw ConfigError("policy: pattern count mismatch for a type");
        double sum = 0.0;
        for (double p : policy.probs[i]) {
            if (p < -1e-12) throw ConfigError("policy: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("policy: probabilities must sum to 1");
    }
}

double tasks_of(const RecoveryPattern& pat, int job_type, int cls, int k) {
    if (cls == k) return pat.num_coded;
    if (pat.num_coded == 0) return cls == job_type ? 1.0 : 0.0;
    return std::count(pat.helper_types.begin(), pat.helper_types.end(), cls) ? 1.0 : 0.0;
}

}  // namespace

RoutingPolicy uniform_uncoded_policy(const SystemSpec& system) {
    auto patterns = all_patterns(system);
    RoutingPolicy policy;
    policy.probs.resize(system.k);
    for (int i = 0; i < system.k; ++i) {
        policy.probs[i].assign(patterns[i].size(), 0.0);
        policy.probs[i][0] = 1.0;  // canonical order puts own-systematic first
    }
    return policy;
}

RoutingPolicy heavy_regime_policy(const SystemSpec& system,
                                  const std::vector<double>& lambda, int istar,
                                  int kstar) {
    const int k = system.k;
    if (istar < 1 || istar >= k) throw ConfigError("heavy_regime_policy: bad istar");
    if (kstar < 1 || kstar > istar) throw ConfigError("heavy_regime_policy: bad kstar");
    if (system.n_coded < istar)
        throw InfeasibleError("heavy_regime_policy: needs n_coded >= istar");

    SlackProfile slack = slack_profile(system, lambda);
    double alpha_head = 0.0;
    for (int j = 0; j < kstar; ++j) alpha_head += system.alpha[slack.sort_order[j]];
    const double v = 1.0 / (kstar * alpha_head);
    const double offload = v * system.n_coded / system.n;
    if (offload > 1.0 + 1e-12)
        throw InfeasibleError("heavy_regime_policy: offload probability exceeds 1");

    std::vector<int> helpers;  // types ranked above istar, original indices
    for (int j = istar; j < k; ++j) helpers.push_back(slack.sort_order[j]);
    std::sort(helpers.begin(), helpers.end());

    auto patterns = all_patterns(system);
    RoutingPolicy policy = uniform_uncoded_policy(system);
    for (int j = 0; j < kstar; ++j) {
        int type = slack.sort_order[j];
        int target = -1;
        for (std::size_t p = 0; p < patterns[type].size(); ++p) {
            if (patterns[type][p].num_coded == istar &&
                patterns[type][p].helper_types == helpers) {
                target = static_cast<int>(p);
                break;
            }
        }
        if (target < 0)
            throw InfeasibleError("heavy_regime_policy: required pattern infeasible");
        policy.probs[type][0] = 1.0 - offload;
        policy.probs[type][target] = offload;
    }
    return policy;
}

LoadProfile load_profile(const SystemSpec& system, const std::vector<double>& lambda,
                         const RoutingPolicy& policy) {
    const int k = system.k;
    if (static_cast<int>(lambda.size()) != k)
        throw ConfigError("load_profile: lambda dimension mismatch");
    auto patterns = all_patterns(system);
    check_policy_shape(system, patterns, policy);

    LoadProfile prof;
    prof.totals.assign(k + 1, 0.0);
    for (int i = 0; i < k; ++i)
        for (std::size_t p = 0; p < patterns[i].size(); ++p) {
            double flow = lambda[i] * policy.probs[i][p];
            if (flow == 0.0) continue;
            for (int c = 0; c <= k; ++c)
                prof.totals[c] += flow * tasks_of(patterns[i][p], i, c, k);
        }

    prof.nu.assign(k + 1, 0.0);
    for (int c = 0; c < k; ++c) prof.nu[c] = prof.totals[c] / system.systematic[c];
    prof.nu[k] = system.n_coded > 0 ? prof.totals[k] / system.n_coded : 0.0;
    if (system.n_coded == 0 && prof.totals[k] > 1e-12)
        throw ConfigError("load_profile: coded tasks without coded servers");
    return prof;
}

bool policy_is_stabilizing(const LoadProfile& profile) {
    for (double v : profile.nu)
        if (v >= 1.0 - kEps) return false;
    return true;
}

Property41Report check_property_41(const SystemSpec& system, const RoutingPolicy& policy,
                                   double bound) {
    Property41Report rep;
    if (system.n_coded == 0) return rep;
    double worst = 0.0;
    for (const auto& probs : policy.probs)
        worst = std::max(worst, 1.0 - probs[0]);
    rep.ratio = worst * system.n / system.n_coded;
    rep.within_bound = rep.ratio <= bound;
    return rep;
}

double expected_max_exponentials(const std::vector<double>& rates) {
    const int m = static_cast<int>(rates.size());
    if (m < 1 || m > 20)
        throw ConfigError("expected_max_exponentials: need 1..20 rates");
    for (double r : rates)
        if (!(r > 0.0)) throw ConfigError("expected_max_exponentials: rates must be positive");

    std::vector<double> subset_sum(std::size_t(1) << m, 0.0);
    double total = 0.0;
    for (std::size_t mask = 1; mask < subset_sum.size(); ++mask) {
        int low = std::countr_zero(static_cast<unsigned long long>(mask));
        subset_sum[mask] = subset_sum[mask & (mask - 1)] + rates[low];
        int bits = std::popcount(static_cast<unsigned long long>(mask));
        total += (bits % 2 == 1 ? 1.0 : -1.0) / subset_sum[mask];
    }
    return total;
}

ApproxObjective approx_mean_response(const SystemSpec& system,
                                     const std::vector<double>& lambda,
                                     const RoutingPolicy& policy) {
    const int k = system.k;
    auto patterns = all_patterns(system);
    check_policy_shape(system, patterns, policy);
    LoadProfile prof = load_profile(system, lambda, policy);

    ApproxObjective obj;
    obj.per_type.assign(k, 0.0);
    double lambda_sum = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    for (int i = 0; i < k; ++i) {
        for (std::size_t p = 0; p < patterns[i].size(); ++p) {
            double prob = policy.probs[i][p];
            if (prob <= 1e-15) continue;
            const auto& pat = patterns[i][p];
            std::vector<double> rates;
            if (pat.num_coded == 0) {
                rates.push_back(1.0 - prof.nu[i]);
            } else {
                for (int c = 0; c < pat.num_coded; ++c)
                    rates.push_back(1.0 - prof.nu[k]);
                for (int h : pat.helper_types) rates.push_back(1.0 - prof.nu[h]);
            }
            for (double r : rates)
                if (r <= 1e-12)
                    throw InfeasibleError("approx_mean_response: policy not stabilizing");
            obj.per_type[i] += prob * expected_max_exponentials(rates);
        }
        double weight = lambda_sum > 0.0 ? lambda[i] / lambda_sum : 1.0 / k;
        obj.value += weight * obj.per_type[i];
    }
    return obj;
}

namespace {

std::vector<double> project_simplex(std::vector<double> v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    int rho = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cum += u[j];
        double t = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) {
            rho = static_cast<int>(j + 1);
            theta = t;
        }
    }
    for (double& x : v) x = std::max(x - theta, 0.0);
    return v;
}

}  // namespace

RoutingPolicy pseudo_optimal_policy(const SystemSpec& system,
                                    const std::vector<double>& lambda,
                                    const OptimizerConfig& config) {
    if (coded_contains_waterfill(system, lambda).verdict !=
        Membership::Verdict::interior)
        throw InfeasibleError("pseudo_optimal_policy: lambda outside the coded region");

    auto patterns = all_patterns(system);
    const int k = system.k;
    std::vector<int> offset(k + 1, 0);
    for (int i = 0; i < k; ++i)
        offset[i + 1] = offset[i] + static_cast<int>(patterns[i].size());
    const int dim = offset[k];

    auto to_policy = [&](const std::vector<double>& x) {
        RoutingPolicy pol;
        pol.probs.resize(k);
        for (int i = 0; i < k; ++i)
            pol.probs[i].assign(x.begin() + offset[i], x.begin() + offset[i + 1]);
        return pol;
    };
    auto to_x = [&](const RoutingPolicy& pol) {
        std::vector<double> x;
        for (const auto& probs : pol.probs) x.insert(x.end(), probs.begin(), probs.end());
        return x;
    };
    auto project = [&](std::vector<double> x) {
        for (int i = 0; i < k; ++i) {
            std::vector<double> block(x.begin() + offset[i], x.begin() + offset[i + 1]);
            block = project_simplex(std::move(block));
            std::copy(block.begin(), block.end(), x.begin() + offset[i]);
        }
        return x;
    };

    const double nu_cap = 1.0 - 1e-6;
    // Evaluate on block-normalized coordinates so finite-difference probes
    // (which perturb a single coordinate off the simplex) stay meaningful.
    auto objective = [&](const std::vector<double>& x_raw) {
        std::vector<double> x = x_raw;
        for (int i = 0; i < k; ++i) {
            double sum = 0.0;
            for (int j = offset[i]; j < offset[i + 1]; ++j) sum += x[j];
            if (sum <= 1e-12) return 1e12;
            for (int j = offset[i]; j < offset[i + 1]; ++j) x[j] /= sum;
        }
        RoutingPolicy pol = to_policy(x);
        LoadProfile prof;
        try {
            prof = load_profile(system, lambda, pol);
        } catch (const ConfigError&) {
            return 1e12;
        }
        double nu_max = *std::max_element(prof.nu.begin(), prof.nu.end());
        if (nu_max >= nu_cap) return 1e6 * (1.0 + (nu_max - nu_cap));
        try {
            return approx_mean_response(system, lambda, pol).value;
        } catch (const InfeasibleError&) {
            return 1e6;
        }
    };

    // Warm starts; the returned policy is never worse than any of them.
    std::vector<std::vector<double>> starts;
    starts.push_back(to_x(uniform_uncoded_policy(system)));
    {
        std::vector<double> bary(dim);
        for (int i = 0; i < k; ++i) {
            double p = 1.0 / static_cast<double>(patterns[i].size());
            for (int j = offset[i]; j < offset[i + 1]; ++j) bary[j] = p;
        }
        starts.push_back(std::move(bary));
    }
    if (k >= 2) {
        SlackProfile slack = slack_profile(system, lambda);
        std::vector<double> alpha_sorted(k);
        for (int j = 0; j < k; ++j) alpha_sorted[j] = system.alpha[slack.sort_order[j]];
        int istar = bottleneck_index(alpha_sorted);
        for (int kstar = 1; kstar <= istar; ++kstar) {
            try {
                starts.push_back(to_x(heavy_regime_policy(system, lambda, istar, kstar)));
            } catch (const std::exception&) {
            }
        }
    }
    {
        // seeded random restarts; the objective is non-convex
        Xoshiro256pp rng = Xoshiro256pp::seeded(config.seed, 0, 0);
        for (int s = 0; s < 16; ++s) {
            std::vector<double> x(dim);
            for (int i = 0; i < k; ++i) {
                double sum = 0.0;
                for (int j = offset[i]; j < offset[i + 1]; ++j)
                    sum += (x[j] = rng.exponential(1.0));
                for (int j = offset[i]; j < offset[i + 1]; ++j) x[j] /= sum;
            }
            starts.push_back(std::move(x));
        }
    }

    std::vector<double> best_x;
    double best_f = std::numeric_limits<double>::infinity();
    for (auto& start : starts) {
        std::vector<double> x = project(std::move(start));
        double fx = objective(x);
        if (fx < best_f) {
            best_f = fx;
            best_x = x;
        }
        std::vector<double> grad(dim);
        for (int iter = 0; iter < config.max_iters; ++iter) {
            for (int j = 0; j < dim; ++j) {
                std::vector<double> xp = x;
                xp[j] += config.fd_step;
                grad[j] = (objective(xp) - fx) / config.fd_step;
            }
            double gnorm = 0.0;
            for (double g : grad) gnorm += g * g;
            gnorm = std::sqrt(gnorm);
            if (gnorm < 1e-14) break;

            double eta = 0.5 / std::max(1.0, gnorm);
            std::vector<double> xn;
            double fn = std::numeric_limits<double>::infinity();
            bool improved = false;
            for (int bt = 0; bt < 45; ++bt) {
                std::vector<double> cand = x;
                for (int j = 0; j < dim; ++j) cand[j] -= eta * grad[j];
                cand = project(std::move(cand));
                double fc = objective(cand);
                if (fc < fx - 1e-15) {
                    xn = std::move(cand);
                    fn = fc;
                    improved = true;
                    break;
                }
                eta *= 0.5;
            }
            if (!improved) break;
            double rel = (fx - fn) / std::max(1.0, std::abs(fx));
            x = std::move(xn);
            fx = fn;
            if (fx < best_f) {
                best_f = fx;
                best_x = x;
            }
            if (rel < config.tol) break;
        }
    }
    if (best_f >= 1e6)
        throw InfeasibleError("pseudo_optimal_policy: no stabilizing point found");

    // Clean tiny numerical dust so serialized policies are tidy.
    for (double& v : best_x)
        if (v < 1e-12) v = 0.0;
    best_x = project(std::move(best_x));
    return to_policy(best_x);
}

std::string RoutingPolicy::to_json(const SystemSpec& system) const {
    auto patterns = all_patterns(system);
    check_policy_shape(system, patterns, *this);
    nlohmann::ordered_json j;
    for (int i = 0; i < system.k; ++i) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (std::size_t p = 0; p < patterns[i].size(); ++p) {
            nlohmann::ordered_json pat;
            pat["job_type"] = patterns[i][p].job_type + 1;
            pat["num_coded"] = patterns[i][p].num_coded;
            nlohmann::ordered_json helpers = nlohmann::ordered_json::array();
            for (int h : patterns[i][p].helper_types) helpers.push_back(h + 1);
            pat["helper_types"] = helpers;
            arr.push_back({{"pattern", pat}, {"prob", probs[i][p]}});
        }
        j["type_" + std::to_string(i + 1)] = arr;
    }
    return j.dump();
}

RoutingPolicy RoutingPolicy::from_json(const SystemSpec& system, const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("policy JSON parse error: ") + e.what());
    }
    auto patterns = all_patterns(system);
    RoutingPolicy policy;
    policy.probs.resize(system.k);
    for (int i = 0; i < system.k; ++i) {
        std::string key = "type_" + std::to_string(i + 1);
        if (!j.contains(key)) throw ConfigError("policy JSON: missing " + key);
        policy.probs[i].assign(patterns[i].size(), 0.0);
        for (const auto& entry : j.at(key)) {
            const auto& pj = entry.at("pattern");
            RecoveryPattern pat;
            pat.job_type = pj.at("job_type").get<int>() - 1;
            pat.num_coded = pj.at("num_coded").get<int>();
            for (const auto& h : pj.at("helper_types"))
                pat.helper_types.push_back(h.get<int>() - 1);
            std::sort(pat.helper_types.begin(), pat.helper_types.end());
            auto it = std::find(patterns[i].begin(), patterns[i].end(), pat);
            if (it == patterns[i].end())
                throw ConfigError("policy JSON: unknown pattern for " + key);
            policy.probs[i][it - patterns[i].begin()] = entry.at("prob").get<double>();
        }
        double sum = std::accumulate(policy.probs[i].begin(), policy.probs[i].end(), 0.0);
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("policy JSON: probabilities must sum to 1 for " + key);
        for (double& p : policy.probs[i]) p /= sum;
    }
    return policy;
}

}  // namespace codedq
