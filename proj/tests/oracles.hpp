#pragma once

#include <cmath>
#include <functional>
#include <vector>

// Slow, independent reference implementations used only to cross-check the
// library's closed forms in tests.
namespace oracles {

// E[max of independent exponentials] via numeric integration of the survival
// function 1 - prod_i (1 - e^{-r_i t}).
inline double emax_integrated(const std::vector<double>& rates) {
    double rmin = rates[0];
    for (double r : rates) rmin = std::min(rmin, r);
    const double horizon = 60.0 / rmin;
    const int steps = 400000;  // composite Simpson, even count
    const double h = horizon / steps;
    auto surv = [&](double t) {
        double prod = 1.0;
        for (double r : rates) prod *= 1.0 - std::exp(-r * t);
        return 1.0 - prod;
    };
    double acc = surv(0.0) + surv(horizon);
    for (int i = 1; i < steps; ++i) acc += (i % 2 ? 4.0 : 2.0) * surv(i * h);
    return acc * h / 3.0;
}

// Largest x in [lo, hi] with pred(x) true, assuming pred is monotone
// (true below the boundary). Requires pred(lo) true.
inline double bisect_boundary(double lo, double hi, double tol,
                              const std::function<bool(double)>& pred) {
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (pred(mid))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace oracles
