#include "dynqueue/stability.hpp"

#include "dynqueue/errors.hpp"
#include "dynqueue/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dynq {

namespace {

void refuse_degenerate(const CriticalPoint& critical, const char* op) {
    if (critical.degenerate) {
        throw RefusedError(std::string(op) +
                           ": critical state x_th = 1 (degenerate); the certificate requires x_th < 1");
    }
}

// Largest x in [x_th, 1] with S(x) <= level, given S(1) > level. S is convex
// and increasing past x_th, so {S > level} is an interval ending at 1.
double last_level_crossing(const ServiceProfile& profile, double from, double level) {
    double lo = from;
    double hi = 1.0;
    for (int it = 0; it < kMaxSolverIterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (profile(mid) > level) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return std::abs(profile(lo) - level) <= std::abs(profile(hi) - level) ? lo : hi;
}

}  // namespace

double eval_g(double x, const ServiceProfile& profile, double tau) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("eval_g: state must lie in [0,1]");
    if (!(tau > 0.0)) throw DomainError("eval_g: tau must be positive");
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    const double x_min = -std::expm1(-profile.s_min() / tau);
    return profile.s_min() + tau * std::log(x_min / x);
}

StabilityConstants compute_constants(const ServiceProfile& profile, double tau, const CriticalPoint& critical) {
    refuse_degenerate(critical, "compute_constants");
    if (!(tau > 0.0)) throw DomainError("compute_constants: tau must be positive");

    const double period = 1.0 / critical.lambda_eq_max;
    StabilityConstants k;
    k.x_min = -std::expm1(-profile.s_min() / tau);
    // g is strictly decreasing, so {g > period} = [0, x_tilde) with
    // g(x_tilde) = period exactly.
    k.x_tilde = k.x_min * std::exp((profile.s_min() - period) / tau);
    k.x_l1 = std::min(k.x_min, k.x_tilde);

    if (!(profile(1.0) > period)) {
        throw RefusedError("compute_constants: S(1) <= 1/lambda_eq_max; the critical point is degenerate");
    }
    k.x_u1 = last_level_crossing(profile, critical.x_th, period);

    const double decay = std::exp(-2.0 * period / tau);
    k.x_u2 = 1.0 - (1.0 - k.x_l1) * decay;
    k.x_l2 = k.x_u2 * decay;
    k.x_L = std::min(k.x_l1, k.x_l2);
    k.x_U = std::max(0.5 * (1.0 + k.x_u1), k.x_u2);
    if (!(k.x_L > 0.0 && k.x_L < k.x_U && k.x_U < 1.0)) {
        throw ConvergenceError("compute_constants: band [x_L, x_U] = [" + format_real(k.x_L) + ", " +
                               format_real(k.x_U) + "] is not representable in double precision");
    }
    k.c1 = -tau * std::log(k.x_L);
    k.c2 = -tau * std::log1p(-k.x_U);
    k.c = k.c1 + k.c2 + profile.s_max();
    return k;
}

QueueBound queue_upper_bound(const ServiceProfile& profile, double tau, double lambda,
                             const CriticalPoint& critical, double x0, std::int64_t n0) {
    refuse_degenerate(critical, "queue_upper_bound");
    if (!(lambda > 0.0)) throw DomainError("queue_upper_bound: lambda must be positive");
    if (lambda > critical.lambda_eq_max) {
        throw RefusedError("queue_upper_bound: lambda exceeds lambda_eq_max; the bound does not apply");
    }
    if (!(x0 >= 0.0 && x0 <= 1.0) || n0 < 0) throw DomainError("queue_upper_bound: invalid initial condition");

    const double x_th = critical.x_th;
    QueueBound qb;
    qb.n_t1 = std::max<std::int64_t>(0, n0 - 1);
    if (x0 > x_th) {
        const auto waited = static_cast<std::int64_t>(std::floor(lambda * tau * std::log(x0 / x_th)));
        qb.n_t1 = std::max(qb.n_t1, n0 - 1 + waited);
    }
    const double s_max = profile.s_max();
    const double rise_time = -tau * std::log1p(-x_th) + s_max;
    qb.rise_increment = static_cast<std::int64_t>(std::ceil((lambda - 1.0 / s_max) * rise_time));
    qb.idle_increment = static_cast<std::int64_t>(std::ceil(-lambda * tau * std::log(x_th)));
    qb.bound = qb.n_t1 + qb.rise_increment + qb.idle_increment;
    return qb;
}

double overload_lower_bound(const StabilityConstants& constants, double lambda, double lambda_eq_max,
                            std::int64_t n1, std::int64_t k_index_gap) {
    if (!(lambda > lambda_eq_max)) {
        throw RefusedError("overload_lower_bound: requires lambda > lambda_eq_max");
    }
    return static_cast<double>(n1) - lambda * constants.c +
           static_cast<double>(k_index_gap) * (lambda / lambda_eq_max - 1.0);
}

OverloadCheck check_overload_bound(const Trajectory& trajectory, const StabilityConstants& constants,
                                   double lambda, double lambda_eq_max) {
    OverloadCheck out;
    const auto& starts = trajectory.summary.service_starts;
    std::optional<std::size_t> first;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        if (starts[i].x < constants.x_L || starts[i].x > constants.x_U) continue;
        if (!first) first = i;
        const double bound = overload_lower_bound(constants, lambda, lambda_eq_max, starts[*first].n,
                                                  static_cast<std::int64_t>(i - *first));
        const double margin = static_cast<double>(starts[i].n) - bound;
        if (out.band_starts == 0 || margin < out.min_margin) {
            out.min_margin = margin;
            out.worst_index = i;
        }
        ++out.band_starts;
    }
    out.holds = out.band_starts == 0 || out.min_margin >= 0.0;
    return out;
}

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::stable: return "stable";
        case Verdict::unstable: return "unstable";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

Classification classify(const Trajectory& trajectory, const ServiceProfile& profile, double tau, double lambda,
                        const CriticalPoint& critical) {
    Classification out;
    const auto& summary = trajectory.summary;
    out.max_queue_at_starts = summary.max_queue_at_starts;
    out.unstable_threshold = (lambda / critical.lambda_eq_max - 1.0) * critical.lambda_eq_max / 2.0;

    if (summary.service_starts.size() < kMinStartsForGrowth) {
        out.reason = "too few service starts to fit a growth rate";
        return out;
    }
    const auto growth = growth_rate_estimate(trajectory);
    out.growth_rate = growth.slope;
    out.growth_residual = growth.residual;
    out.slope_tolerance = 10.0 / summary.end_time;

    const auto& policy = trajectory.policy;
    const bool bound_applies = !critical.degenerate && lambda <= critical.lambda_eq_max &&
                               policy.kind == PolicyKind::threshold &&
                               std::abs(policy.threshold - critical.x_th) <= 1e-12;
    if (bound_applies) {
        out.bound = queue_upper_bound(profile, tau, lambda, critical, trajectory.config.x0, trajectory.config.n0);
        if (summary.max_queue_at_starts <= out.bound->bound) {
            out.verdict = Verdict::stable;
            out.reason = "queue length at every service start within the threshold-policy bound";
            return out;
        }
    }
    if (lambda > critical.lambda_eq_max && growth.slope >= out.unstable_threshold) {
        out.verdict = Verdict::unstable;
        out.reason = "fitted queue growth at least half the rate excess over lambda_eq_max";
        return out;
    }
    if (growth.slope <= out.slope_tolerance) {
        out.verdict = Verdict::stable;
        out.reason = "fitted queue growth below slope tolerance";
        return out;
    }
    out.reason = "neither certificate met at this horizon";
    return out;
}

}  // namespace dynq
