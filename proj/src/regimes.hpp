#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace codedq {

struct SlackProfile {
    std::vector<double> beta;     // alpha_i * n - lambda_i, original order
    std::vector<int> sort_order;  // stable permutation sorting beta ascending
};

// Finite-instance cutoffs for the asymptotic regime definitions. Tuned so the
// reference arrival presets classify as named for n >= 2^9 (see README).
struct RegimeThresholds {
    double c_light = 0.6;   // light: beta_1 >= c_light * sqrt(n * n_coded)
    double c_inner = 0.6;   // inner-heavy lower cutoff: beta_1 >= c_inner * n_coded
    double c_heavy = 2.0;   // helper separation: beta_{i*+1} >= c_heavy * (scale)
    double c_kstar = 1.0;   // kstar qualification multiplier
};

enum class HeavyKind { inner, outer };

struct RegimeLabel {
    std::string label;  // light, inner_heavy, outer_heavy, uncoded_unstable,
                        // coded_unstable, unclassified
    int istar = 0;                       // 1-based
    std::optional<int> kstar;            // 1-based, heavy regimes only
    std::map<std::string, double> diagnostics;

    std::string to_json() const;
};

SlackProfile slack_profile(const SystemSpec& system, const std::vector<double>& lambda);

// Largest j with j * sum_{i<=j} alpha_i < 1; alpha must already be in the
// caller's ascending-slack order. Returns 0 when no index qualifies.
int bottleneck_index(const std::vector<double>& alpha_sorted);

// Largest j <= istar whose sorted slack is within the regime's scale.
// Throws when no index qualifies (misclassification signal).
int kstar_index(const SystemSpec& system, const std::vector<double>& lambda,
                HeavyKind kind, const RegimeThresholds& thresholds);

RegimeLabel classify_regime(const SystemSpec& system, const std::vector<double>& lambda,
                            const RegimeThresholds& thresholds);

}  // namespace codedq
