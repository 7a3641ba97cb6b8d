#pragma once

#include "dynqueue/equilibrium.hpp"
#include "dynqueue/service_model.hpp"
#include "dynqueue/simulator.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dynq {

// Constants behind the instability certificate for rates above the critical
// rate. Service-start states that keep to [x_L, x_U] satisfy
// n_k >= n_1 - lambda c + (i_k - i_1)(lambda / lambda_eq_max - 1).
struct StabilityConstants {
    double x_min = 0.0;  // lowest possible state right after a service
    double x_tilde = 0.0;
    double x_l1 = 0.0;
    double x_l2 = 0.0;
    double x_u1 = 0.0;
    double x_u2 = 0.0;
    double x_L = 0.0;
    double x_U = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double c = 0.0;
};

// g(x) = s_min + tau ln(x_min / x): lower bound on the gap between successive
// service starts that both sit below x. g(0) = +inf.
double eval_g(double x, const ServiceProfile& profile, double tau);

// Refuses (RefusedError) a degenerate critical point.
StabilityConstants compute_constants(const ServiceProfile& profile, double tau, const CriticalPoint& critical);

// Upper bound on the queue length at every service start under the threshold
// policy at x_th, for rates up to the critical rate.
struct QueueBound {
    std::int64_t n_t1 = 0;
    std::int64_t bound = 0;
    // Components, kept for auditing.
    std::int64_t rise_increment = 0;  // ceil((lambda - 1/s_max)(-tau ln(1 - x_th) + s_max))
    std::int64_t idle_increment = 0;  // ceil(-lambda tau ln x_th)
};

QueueBound queue_upper_bound(const ServiceProfile& profile, double tau, double lambda,
                             const CriticalPoint& critical, double x0, std::int64_t n0);

// n1 - lambda c + k_index_gap (lambda / lambda_eq_max - 1); only for
// lambda > lambda_eq_max.
double overload_lower_bound(const StabilityConstants& constants, double lambda, double lambda_eq_max,
                            std::int64_t n1, std::int64_t k_index_gap);

// Checks n_k >= overload_lower_bound(...) along the service starts whose
// state lies in [x_L, x_U], anchored at the first such start.
struct OverloadCheck {
    std::size_t band_starts = 0;  // service starts inside [x_L, x_U]
    bool holds = true;
    double min_margin = 0.0;  // min over band starts of n_k - bound
    std::size_t worst_index = 0;
};

OverloadCheck check_overload_bound(const Trajectory& trajectory, const StabilityConstants& constants,
                                   double lambda, double lambda_eq_max);

enum class Verdict { stable, unstable, inconclusive };

std::string_view to_string(Verdict verdict);

struct Classification {
    Verdict verdict = Verdict::inconclusive;
    std::optional<double> growth_rate;
    std::optional<double> growth_residual;
    double slope_tolerance = 0.0;    // 10 / horizon time
    double unstable_threshold = 0.0;  // (lambda - lambda_eq_max) / 2
    std::optional<QueueBound> bound;  // when the bound applies
    std::int64_t max_queue_at_starts = 0;
    std::string reason;
};

// Finite-horizon verdict: stable when the queue bound holds (threshold at
// x_th, lambda <= lambda_eq_max) or the fitted growth is below the slope
// tolerance; unstable when the fitted growth reaches half the rate excess.
Classification classify(const Trajectory& trajectory, const ServiceProfile& profile, double tau, double lambda,
                        const CriticalPoint& critical);

}  // namespace dynq
