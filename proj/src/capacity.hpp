#pragma once

#include <string>
#include <vector>

#include "model.hpp"

namespace codedq {

constexpr double kEps = 1e-9;

struct Membership {
    enum class Verdict { interior, boundary, exterior };
    Verdict verdict = Verdict::exterior;
    double margin = 0.0;
};

const char* to_string(Membership::Verdict v);

struct ResidualProfile {
    std::vector<double> r;        // s_i - lambda_i, original order
    std::vector<double> r_plus;
    std::vector<double> r_minus;
    std::vector<int> sort_order;  // stable permutation sorting r ascending
};

struct GridSpec {
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<int> points;  // per axis, >= 2
};

Membership uncoded_contains(const SystemSpec& system, const std::vector<double>& lambda);

ResidualProfile residual_profile(const SystemSpec& system, const std::vector<double>& lambda);

Membership coded_contains_waterfill(const SystemSpec& system,
                                    const std::vector<double>& lambda);

Membership coded_contains_lp(const SystemSpec& system, const std::vector<double>& lambda);

// Supremum lambda2 with (lambda1, lambda2) in the closed coded region; k = 2 only.
double k2_boundary(const SystemSpec& system, double lambda1);

// CSV text: lambda_1,...,lambda_k,uncoded,coded; row-major over the grid.
std::string region_sweep(const SystemSpec& system, const GridSpec& grid);

}  // namespace codedq
