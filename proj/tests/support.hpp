#pragma once

#include "dynqueue/equilibrium.hpp"
#include "dynqueue/service_model.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace dynq::test {

// S(x) = 1 + 4(x - 0.5)^2, the reference profile used throughout.
inline ServiceProfile reference_quadratic() { return ServiceProfile::quadratic(4.0, 0.5, 1.0); }

// Non-degenerate profiles spanning every family, plus constant S = 2.
inline std::vector<ServiceProfile> profile_matrix() {
    return {
        ServiceProfile::constant(2.0),
        ServiceProfile::affine(1.0, 1.0),
        ServiceProfile::quadratic(4.0, 0.5, 1.0),
        ServiceProfile::quadratic(2.0, 0.3, 0.5),
        ServiceProfile::quadratic(8.0, 0.7, 1.5),
        ServiceProfile::quadratic(1.0, 0.0, 0.8),
        ServiceProfile::piecewise_linear({0.0, 2.0, 0.5, 1.0, 1.0, 2.0}),
        ServiceProfile::piecewise_linear({0.0, 3.0, 0.25, 1.5, 0.625, 1.0, 1.0, 2.5}),
        ServiceProfile::piecewise_linear({0.0, 1.0, 0.375, 1.0, 1.0, 3.0}),
        ServiceProfile::piecewise_linear({0.0, 1.2, 0.5, 0.8, 0.75, 1.0, 1.0, 1.6}),
    };
}

// Independent estimate of the critical rate: max over a uniform grid of
// 1 / (one-task cycle time).
inline double grid_critical_rate(const ServiceProfile& s, double tau, int points) {
    double best = 0.0;
    for (int i = 1; i <= points; ++i) {
        const double x = static_cast<double>(i) / points;
        const double t = one_task_cycle_time(s, tau, x);
        if (std::isfinite(t)) best = std::max(best, 1.0 / t);
    }
    return best;
}

// Golden-section minimizer of a unimodal function on [lo, hi].
template <class F>
double golden_section(F f, double lo, double hi, int iterations = 200) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - r * (b - a);
    double d = a + r * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int i = 0; i < iterations && b - a > 1e-15; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace dynq::test
