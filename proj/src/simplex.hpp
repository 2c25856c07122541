#pragma once

#include <vector>

namespace codedq {

enum class RowType { LessEq, Equal };

struct LpResult {
    bool feasible = false;
    double objective = 0.0;
    std::vector<double> x;
};

// Maximize c.x subject to A x (<= | =) b, x >= 0. Requires b >= 0.
// Dense two-phase simplex with Bland's rule; intended for tiny problems.
LpResult solve_lp(const std::vector<std::vector<double>>& a,
                  const std::vector<RowType>& row_types,
                  const std::vector<double>& b,
                  const std::vector<double>& c);

}  // namespace codedq
