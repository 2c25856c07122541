#include "capacity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "simplex.hpp"

namespace codedq {

namespace {

Membership verdict_from_margin(double margin) {
    Membership m;
    m.margin = margin;
    if (margin > kEps)
        m.verdict = Membership::Verdict::interior;
    else if (margin < -kEps)
        m.verdict = Membership::Verdict::exterior;
    else
        m.verdict = Membership::Verdict::boundary;
    return m;
}

void check_lambda(const SystemSpec& system, const std::vector<double>& lambda) {
    if (static_cast<int>(lambda.size()) != system.k)
        throw std::invalid_argument("lambda dimension mismatch");
    for (double v : lambda)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("lambda entries must be finite and non-negative");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

const char* to_string(Membership::Verdict v) {
    switch (v) {
        case Membership::Verdict::interior: return "interior";
        case Membership::Verdict::boundary: return "boundary";
        case Membership::Verdict::exterior: return "exterior";
    }
    return "exterior";
}

Membership uncoded_contains(const SystemSpec& system, const std::vector<double>& lambda) {
    check_lambda(system, lambda);
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < system.k; ++i)
        margin = std::min(margin, system.alpha[i] * system.n - lambda[i]);
    return verdict_from_margin(margin);
}

ResidualProfile residual_profile(const SystemSpec& system,
                                 const std::vector<double>& lambda) {
    check_lambda(system, lambda);
    ResidualProfile p;
    p.r.resize(system.k);
    p.r_plus.resize(system.k);
    p.r_minus.resize(system.k);
    p.sort_order.resize(system.k);
    for (int i = 0; i < system.k; ++i) {
        p.r[i] = system.systematic[i] - lambda[i];
        p.r_plus[i] = std::max(p.r[i], 0.0);
        p.r_minus[i] = std::max(-p.r[i], 0.0);
    }
    std::iota(p.sort_order.begin(), p.sort_order.end(), 0);
    std::stable_sort(p.sort_order.begin(), p.sort_order.end(),
                     [&](int a, int b) { return p.r[a] < p.r[b]; });
    return p;
}

Membership coded_contains_waterfill(const SystemSpec& system,
                                    const std::vector<double>& lambda) {
    ResidualProfile p = residual_profile(system, lambda);
    const int k = system.k;

    // No coded servers: the region is the box on the systematic counts.
    if (system.n_coded == 0) {
        double margin = std::numeric_limits<double>::infinity();
        for (double v : p.r) margin = std::min(margin, v);
        return verdict_from_margin(margin);
    }

    // The water-filling characterization needs every stage's recovery
    // pattern to exist, i.e. n_coded >= k. Below that the closed form is
    // invalid either way (too weak as stated, and no simple tightening is
    // exact for k >= 3), so membership falls back to the flow relaxation.
    if (system.n_coded < k)
        return coded_contains_lp(system, lambda);

    double deficit = 0.0;
    for (double v : p.r_minus) deficit += v;

    double waterfill = std::numeric_limits<double>::infinity();
    double prefix = 0.0;
    for (int k0 = 1; k0 <= k; ++k0) {
        prefix += p.r_plus[p.sort_order[k0 - 1]];
        waterfill = std::min(waterfill, (system.n_coded + prefix) / k0);
    }
    return verdict_from_margin(waterfill - deficit);
}

Membership coded_contains_lp(const SystemSpec& system, const std::vector<double>& lambda) {
    check_lambda(system, lambda);
    const int k = system.k;

    std::vector<std::vector<RecoveryPattern>> patterns(k);
    std::vector<int> offset(k + 1, 0);
    for (int i = 0; i < k; ++i) {
        patterns[i] = enumerate_recovery_patterns(system, i);
        offset[i + 1] = offset[i] + static_cast<int>(patterns[i].size());
    }
    const int nf = offset[k];
    const int iu = nf, iw = nf + 1;  // slack t = u - w, free
    const int nvar = nf + 2;
    const bool coded_row = system.n_coded > 0;
    const int n_ineq = k + (coded_row ? 1 : 0);

    std::vector<std::vector<double>> a;
    std::vector<RowType> types;
    std::vector<double> b;

    for (int c = 0; c < n_ineq; ++c) {
        std::vector<double> row(nvar, 0.0);
        for (int i = 0; i < k; ++i) {
            for (std::size_t p = 0; p < patterns[i].size(); ++p) {
                const auto& pat = patterns[i][p];
                double tasks = 0.0;
                if (c < k) {
                    if (pat.num_coded == 0)
                        tasks = (c == i) ? 1.0 : 0.0;
                    else
                        tasks = std::count(pat.helper_types.begin(),
                                           pat.helper_types.end(), c) ? 1.0 : 0.0;
                } else {
                    tasks = pat.num_coded;
                }
                row[offset[i] + static_cast<int>(p)] = tasks;
            }
        }
        row[iu] = 1.0;
        row[iw] = -1.0;
        a.push_back(std::move(row));
        types.push_back(RowType::LessEq);
        b.push_back(c < k ? static_cast<double>(system.systematic[c])
                          : static_cast<double>(system.n_coded));
    }
    for (int i = 0; i < k; ++i) {
        std::vector<double> row(nvar, 0.0);
        for (std::size_t p = 0; p < patterns[i].size(); ++p)
            row[offset[i] + static_cast<int>(p)] = 1.0;
        a.push_back(std::move(row));
        types.push_back(RowType::Equal);
        b.push_back(lambda[i]);
    }

    std::vector<double> c(nvar, 0.0);
    c[iu] = 1.0;
    c[iw] = -1.0;

    LpResult res = solve_lp(a, types, b, c);
    if (!res.feasible)
        throw std::runtime_error("coded_contains_lp: internal LP infeasibility");
    return verdict_from_margin(res.objective);
}

double k2_boundary(const SystemSpec& system, double lambda1) {
    if (system.k != 2) throw std::invalid_argument("k2_boundary: requires k = 2");
    if (lambda1 < 0.0) throw std::invalid_argument("k2_boundary: negative lambda1");
    const double s1 = system.systematic[0];
    const double s2 = system.systematic[1];
    const double nc = system.n_coded;
    if (lambda1 > s1 + nc + kEps)
        throw std::invalid_argument("k2_boundary: lambda1 beyond maximum supportable rate");

    double b;
    if (system.n_coded >= 2) {
        b = std::min({s2 + nc,
                      s2 + 0.5 * s1 + 0.5 * nc - 0.5 * lambda1,
                      s1 + s2 + 0.5 * nc - lambda1,
                      2.0 * s1 + s2 + nc - 2.0 * lambda1});
    } else {
        b = std::min(s2 + nc, s1 + s2 - lambda1);
    }
    return std::max(b, 0.0);
}

std::string region_sweep(const SystemSpec& system, const GridSpec& grid) {
    const int k = system.k;
    if (k != 2 && k != 3)
        throw std::invalid_argument("region_sweep: only k in {2,3} supported");
    if (static_cast<int>(grid.lo.size()) != k || static_cast<int>(grid.hi.size()) != k ||
        static_cast<int>(grid.points.size()) != k)
        throw std::invalid_argument("region_sweep: grid dimension mismatch");
    for (int i = 0; i < k; ++i) {
        if (grid.points[i] < 2) throw std::invalid_argument("region_sweep: need >= 2 points per axis");
        if (grid.hi[i] < grid.lo[i]) throw std::invalid_argument("region_sweep: hi < lo");
    }

    std::string out = "lambda_1";
    for (int i = 2; i <= k; ++i) out += ",lambda_" + std::to_string(i);
    out += ",uncoded,coded\n";

    std::vector<int> idx(k, 0);
    std::vector<double> lambda(k);
    for (;;) {
        for (int i = 0; i < k; ++i)
            lambda[i] = grid.lo[i] +
                        (grid.hi[i] - grid.lo[i]) * idx[i] / (grid.points[i] - 1);
        Membership u = uncoded_contains(system, lambda);
        Membership c = coded_contains_waterfill(system, lambda);
        for (int i = 0; i < k; ++i) {
            out += fmt(lambda[i]);
            out += ',';
        }
        out += to_string(u.verdict);
        out += ',';
        out += to_string(c.verdict);
        out += '\n';

        int axis = k - 1;
        while (axis >= 0 && ++idx[axis] == grid.points[axis]) idx[axis--] = 0;
        if (axis < 0) break;
    }
    return out;
}

}  // namespace codedq
