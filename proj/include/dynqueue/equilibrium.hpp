#pragma once

#include "dynqueue/service_model.hpp"

#include <vector>

namespace dynq {

// Solver tolerances.
inline constexpr double kRateRelTolerance = 1e-9;
inline constexpr double kStateTolerance = 1e-10;
inline constexpr double kRootResidualTolerance = 1e-10;
inline constexpr double kDegenerateMargin = 1e-6;
inline constexpr int kMaxSolverIterations = 200;

// Return-time curve R(x, tau, lambda) = tau * ln(1 - (1 - e^{1/(lambda tau)}) x).
// A state x is a one-task equilibrium for rate lambda iff S(x) = R(x, tau, lambda).
double eval_R(double x, double tau, double lambda);

struct RPartials {
    double dR_dx;
    double d2R_dx2;
};
RPartials eval_R_partials(double x, double tau, double lambda);

// Minimum of the strictly convex gap G(x) = S(x) - R(x, tau, lambda) on [0,1].
struct GapMinimum {
    double x_star;
    double value;
};
GapMinimum gap_minimum(const ServiceProfile& profile, double tau, double lambda);

// One-task equilibrium states for (tau, lambda): zero, one or two roots of G,
// sorted ascending.
struct EquilibriumSet {
    double lambda = 0.0;
    std::vector<double> roots;

    bool empty() const noexcept { return roots.empty(); }
};
EquilibriumSet equilibrium_states(const ServiceProfile& profile, double tau, double lambda);

struct CriticalPoint {
    double lambda_eq_max = 0.0;
    double x_th = 0.0;
    bool degenerate = false;  // x_th == 1 within kDegenerateMargin
    double gap_at_min = 0.0;  // S(x_th) - R(x_th, tau, lambda_eq_max)
};

// Largest rate admitting a one-task equilibrium and the tangency state at
// that rate. Bisects lambda on [1/s_max, 1/s_min] against the sign of the gap
// minimum.
CriticalPoint critical_rate(const ServiceProfile& profile, double tau);

// Time to serve one task starting at x and idle back down to x. Returns +inf
// for x = 0.
double one_task_cycle_time(const ServiceProfile& profile, double tau, double x);

struct ThresholdInterval {
    double lower;
    double upper;
};

// Any threshold in the returned interval stabilizes the queue for all
// arrival rates up to lambda_prime. Throws InfeasibleError if lambda_prime
// admits no equilibrium.
ThresholdInterval stabilizing_threshold_interval(const ServiceProfile& profile, double tau,
                                                 double lambda_prime);

}  // namespace dynq
