#include "simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace codedq {

namespace {

constexpr double kPivotTol = 1e-11;

struct Tableau {
    int rows = 0;        // constraint rows
    int cols = 0;        // structural + slack + artificial columns
    std::vector<std::vector<double>> t;  // rows x (cols + 1), last col = rhs
    std::vector<double> obj;             // cols + 1, last = objective value
    std::vector<int> basis;              // basic column per row

    void pivot(int pr, int pc) {
        double pv = t[pr][pc];
        for (int j = 0; j <= cols; ++j) t[pr][j] /= pv;
        for (int r = 0; r < rows; ++r) {
            if (r == pr) continue;
            double f = t[r][pc];
            if (f == 0.0) continue;
            for (int j = 0; j <= cols; ++j) t[r][j] -= f * t[pr][j];
        }
        double f = obj[pc];
        if (f != 0.0)
            for (int j = 0; j <= cols; ++j) obj[j] -= f * t[pr][j];
        basis[pr] = pc;
    }

    // Bland's rule: entering = lowest-index column with positive reduced
    // cost, leaving = lowest-index basic variable among min ratios.
    bool run(int usable_cols) {
        for (;;) {
            int pc = -1;
            for (int j = 0; j < usable_cols; ++j) {
                if (obj[j] > kPivotTol) { pc = j; break; }
            }
            if (pc < 0) return true;
            int pr = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int r = 0; r < rows; ++r) {
                if (t[r][pc] <= kPivotTol) continue;
                double ratio = t[r][cols] / t[r][pc];
                if (ratio < best - 1e-15 ||
                    (ratio < best + 1e-15 && (pr < 0 || basis[r] < basis[pr]))) {
                    best = ratio;
                    pr = r;
                }
            }
            if (pr < 0) return false;  // unbounded
            pivot(pr, pc);
        }
    }
};

}  // namespace

LpResult solve_lp(const std::vector<std::vector<double>>& a,
                  const std::vector<RowType>& row_types,
                  const std::vector<double>& b,
                  const std::vector<double>& c) {
    const int m = static_cast<int>(a.size());
    const int n = static_cast<int>(c.size());
    if (static_cast<int>(b.size()) != m || static_cast<int>(row_types.size()) != m)
        throw std::invalid_argument("solve_lp: dimension mismatch");
    for (double v : b)
        if (v < 0.0) throw std::invalid_argument("solve_lp: rhs must be non-negative");

    int n_slack = 0;
    for (RowType rt : row_types)
        if (rt == RowType::LessEq) ++n_slack;

    Tableau tab;
    tab.rows = m;
    tab.cols = n + n_slack + m;  // artificials for every row keep phase 1 simple
    tab.t.assign(m, std::vector<double>(tab.cols + 1, 0.0));
    tab.basis.assign(m, -1);

    int slack_at = n;
    for (int r = 0; r < m; ++r) {
        if (static_cast<int>(a[r].size()) != n)
            throw std::invalid_argument("solve_lp: row length mismatch");
        for (int j = 0; j < n; ++j) tab.t[r][j] = a[r][j];
        tab.t[r][tab.cols] = b[r];
        if (row_types[r] == RowType::LessEq) {
            tab.t[r][slack_at] = 1.0;
            tab.basis[r] = slack_at;
            ++slack_at;
        }
    }
    int art_at = n + n_slack;
    for (int r = 0; r < m; ++r) {
        if (tab.basis[r] >= 0) continue;
        tab.t[r][art_at + r] = 1.0;
        tab.basis[r] = art_at + r;
    }

    // Phase 1: maximize -sum(artificials).
    tab.obj.assign(tab.cols + 1, 0.0);
    for (int r = 0; r < m; ++r) {
        if (tab.basis[r] < art_at) continue;
        for (int j = 0; j <= tab.cols; ++j) tab.obj[j] += tab.t[r][j];
    }
    for (int r = 0; r < m; ++r)
        if (tab.basis[r] >= art_at) tab.obj[tab.basis[r]] = 0.0;
    if (!tab.run(art_at))
        throw std::runtime_error("solve_lp: phase 1 unbounded");

    LpResult res;
    if (tab.obj[tab.cols] > 1e-7) return res;  // infeasible: artificials stuck positive

    // Drive leftover artificials out of the basis where possible.
    for (int r = 0; r < m; ++r) {
        if (tab.basis[r] < art_at) continue;
        int pc = -1;
        for (int j = 0; j < art_at; ++j)
            if (std::abs(tab.t[r][j]) > kPivotTol) { pc = j; break; }
        if (pc >= 0) tab.pivot(r, pc);
        // else the row is redundant; its artificial stays at zero.
    }

    // Phase 2: maximize c.x over structural + slack columns only.
    tab.obj.assign(tab.cols + 1, 0.0);
    for (int j = 0; j < n; ++j) tab.obj[j] = c[j];
    for (int r = 0; r < m; ++r) {
        int bcol = tab.basis[r];
        if (bcol < n && tab.obj[bcol] != 0.0) {
            double f = tab.obj[bcol];
            for (int j = 0; j <= tab.cols; ++j) tab.obj[j] -= f * tab.t[r][j];
        }
    }
    if (!tab.run(art_at))
        throw std::runtime_error("solve_lp: objective unbounded");

    res.feasible = true;
    res.objective = -tab.obj[tab.cols];
    res.x.assign(n, 0.0);
    for (int r = 0; r < m; ++r)
        if (tab.basis[r] < n) res.x[tab.basis[r]] = tab.t[r][tab.cols];
    return res;
}

}  // namespace codedq
