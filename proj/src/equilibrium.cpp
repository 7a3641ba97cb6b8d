#include "dynqueue/equilibrium.hpp"

#include "dynqueue/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dynq {

namespace {

// Beyond this exponent e^{1/(lambda tau)} overflows; R switches to the
// factored form 1/lambda + tau * ln(x + (1 - x) e^{-1/(lambda tau)}).
constexpr double kExpOverflowGuard = 700.0;

void check_args(double x, double tau, double lambda, const char* op) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError(std::string(op) + ": state must lie in [0,1]");
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError(std::string(op) + ": tau must be positive");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw DomainError(std::string(op) + ": lambda must be positive");
    }
}

double gap(const ServiceProfile& profile, double tau, double lambda, double x) {
    return profile(x) - eval_R(x, tau, lambda);
}

double gap_tolerance(const ServiceProfile& profile) {
    return 1e-12 * std::max(1.0, profile.s_max());
}

// Root of G on [lo, hi] given sign(G(lo)) != sign(G(hi)); bisects down to
// adjacent doubles.
double bisect_gap_root(const ServiceProfile& profile, double tau, double lambda, double lo, double hi) {
    double g_lo = gap(profile, tau, lambda, lo);
    double g_hi = gap(profile, tau, lambda, hi);
    if (g_lo == 0.0) return lo;
    if (g_hi == 0.0) return hi;
    const bool lo_positive = g_lo > 0.0;
    for (int it = 0; it < kMaxSolverIterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double g_mid = gap(profile, tau, lambda, mid);
        if (g_mid == 0.0) return mid;
        if ((g_mid > 0.0) == lo_positive) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    const double root = std::abs(g_lo) <= std::abs(g_hi) ? lo : hi;
    const double residual = std::min(std::abs(g_lo), std::abs(g_hi));
    if (residual > kRootResidualTolerance) {
        throw ConvergenceError("equilibrium root residual " + std::to_string(residual) +
                               " exceeds tolerance");
    }
    return root;
}

}  // namespace

double eval_R(double x, double tau, double lambda) {
    check_args(x, tau, lambda, "eval_R");
    if (x == 0.0) return 0.0;
    const double a = 1.0 / (lambda * tau);
    if (a < kExpOverflowGuard) return tau * std::log1p(std::expm1(a) * x);
    return 1.0 / lambda + tau * std::log(x + (1.0 - x) * std::exp(-a));
}

RPartials eval_R_partials(double x, double tau, double lambda) {
    check_args(x, tau, lambda, "eval_R_partials");
    // With q = 1 - e^{-a}: dR/dx = tau q / (e^{-a} + q x), stable for every a > 0.
    const double a = 1.0 / (lambda * tau);
    const double e = std::exp(-a);
    const double q = -std::expm1(-a);
    const double den = e + q * x;
    return {tau * q / den, -tau * q * q / (den * den)};
}

GapMinimum gap_minimum(const ServiceProfile& profile, double tau, double lambda) {
    check_args(0.0, tau, lambda, "gap_minimum");
    // G is strictly convex, so its right derivative is strictly increasing and
    // the minimizer is the point where it changes sign. Bisecting on that sign
    // resolves x* to rounding level, which comparing function values cannot.
    auto right_derivative = [&](double x) {
        const double slope = x < 1.0 ? profile.right_slope(x) : profile.left_slope(x);
        return slope - eval_R_partials(x, tau, lambda).dR_dx;
    };

    if (right_derivative(0.0) >= 0.0) return {0.0, gap(profile, tau, lambda, 0.0)};
    if (profile.left_slope(1.0) - eval_R_partials(1.0, tau, lambda).dR_dx <= 0.0) {
        return {1.0, gap(profile, tau, lambda, 1.0)};
    }

    double lo = 0.0;
    double hi = 1.0;
    int it = 0;
    for (; it < kMaxSolverIterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (right_derivative(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (it == kMaxSolverIterations) {
        throw ConvergenceError("gap minimization did not converge within the iteration cap");
    }
    const double g_lo = gap(profile, tau, lambda, lo);
    const double g_hi = gap(profile, tau, lambda, hi);
    return g_lo < g_hi ? GapMinimum{lo, g_lo} : GapMinimum{hi, g_hi};
}

EquilibriumSet equilibrium_states(const ServiceProfile& profile, double tau, double lambda) {
    EquilibriumSet result;
    result.lambda = lambda;
    const auto gm = gap_minimum(profile, tau, lambda);
    const double tol = gap_tolerance(profile);
    if (gm.value > tol) return result;
    if (gm.value >= -tol) {
        result.roots.push_back(gm.x_star);
        return result;
    }
    // G(0) = S(0) > 0 and G(x*) < 0.
    result.roots.push_back(bisect_gap_root(profile, tau, lambda, 0.0, gm.x_star));
    if (gm.x_star < 1.0) {
        const double g_one = gap(profile, tau, lambda, 1.0);
        if (g_one >= 0.0) result.roots.push_back(bisect_gap_root(profile, tau, lambda, gm.x_star, 1.0));
    }
    return result;
}

CriticalPoint critical_rate(const ServiceProfile& profile, double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("critical_rate: tau must be positive");
    double lo = 1.0 / profile.s_max();
    double hi = 1.0 / profile.s_min();

    // m(lambda) = min G is increasing in lambda; m(lo) <= 0 <= m(hi).
    int it = 0;
    for (; it < kMaxSolverIterations; ++it) {
        if (hi - lo <= 1e-15 * hi) break;
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (gap_minimum(profile, tau, mid).value <= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (it == kMaxSolverIterations) {
        throw ConvergenceError("critical rate bisection did not converge within the iteration cap");
    }

    const auto gm = gap_minimum(profile, tau, lo);
    CriticalPoint cp;
    cp.lambda_eq_max = lo;
    cp.x_th = gm.x_star;
    cp.gap_at_min = gm.value;
    cp.degenerate = cp.x_th >= 1.0 - kDegenerateMargin;
    if (std::abs(cp.gap_at_min) > kRootResidualTolerance * std::max(1.0, profile.s_max())) {
        throw ConvergenceError("tangency residual " + std::to_string(cp.gap_at_min) +
                               " exceeds tolerance");
    }
    if (!(cp.x_th > 0.0)) throw ConvergenceError("critical state collapsed to x = 0");
    return cp;
}

double one_task_cycle_time(const ServiceProfile& profile, double tau, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("one_task_cycle_time: state must lie in [0,1]");
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    const double s = profile(x);
    const double after = busy_update(x, s, tau);
    return s + tau * (std::log(after) - std::log(x));
}

ThresholdInterval stabilizing_threshold_interval(const ServiceProfile& profile, double tau,
                                                 double lambda_prime) {
    const auto eq = equilibrium_states(profile, tau, lambda_prime);
    if (eq.empty()) {
        throw InfeasibleError("no stabilizing threshold: rate " + std::to_string(lambda_prime) +
                              " exceeds the critical rate");
    }
    return {eq.roots.front(), eq.roots.back()};
}

}  // namespace dynq
