#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"

namespace codedq {

// Per-type probability vectors over the canonically enumerated recovery
// patterns of the system the policy was built for.
struct RoutingPolicy {
    std::vector<std::vector<double>> probs;

    std::string to_json(const SystemSpec& system) const;
    static RoutingPolicy from_json(const SystemSpec& system, const std::string& text);
};

// Per-server task arrival rate for each class; index k is the coded class.
struct LoadProfile {
    std::vector<double> nu;      // size k + 1
    std::vector<double> totals;  // class-aggregate task rates, size k + 1
};

struct ApproxObjective {
    double value = 0.0;
    std::vector<double> per_type;
};

struct Property41Report {
    double ratio = 0.0;  // max_i (1 - q_i0) * n / n_coded
    bool within_bound = true;
};

struct OptimizerConfig {
    int max_iters = 5000;
    double tol = 1e-8;
    double fd_step = 1e-6;
    std::uint64_t seed = 0;
};

RoutingPolicy uniform_uncoded_policy(const SystemSpec& system);

RoutingPolicy heavy_regime_policy(const SystemSpec& system,
                                  const std::vector<double>& lambda, int istar,
                                  int kstar);

LoadProfile load_profile(const SystemSpec& system, const std::vector<double>& lambda,
                         const RoutingPolicy& policy);

bool policy_is_stabilizing(const LoadProfile& profile);

Property41Report check_property_41(const SystemSpec& system, const RoutingPolicy& policy,
                                   double bound = 4.0);

// Inclusion-exclusion; rates all positive, at most 20 of them.
double expected_max_exponentials(const std::vector<double>& rates);

ApproxObjective approx_mean_response(const SystemSpec& system,
                                     const std::vector<double>& lambda,
                                     const RoutingPolicy& policy);

RoutingPolicy pseudo_optimal_policy(const SystemSpec& system,
                                    const std::vector<double>& lambda,
                                    const OptimizerConfig& config = {});

}  // namespace codedq
