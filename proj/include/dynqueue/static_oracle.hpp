#pragma once

#include "dynqueue/equilibrium.hpp"
#include "dynqueue/service_model.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace dynq {

// Serve n pre-queued tasks starting and ending at boundary state x, with no
// arrivals.
struct StaticProblem {
    double x = 0.5;  // in (0,1)
    double tau = 1.0;
    int n = 1;
};

// Idle duration before each service. The search fixes idle_before[0] = 0;
// simulate_schedule also accepts a leading idle.
struct StaticSchedule {
    std::vector<double> idle_before;
};

// Total time to run the schedule and idle back to the boundary state, or
// nullopt when the final post-service state ends below the boundary (decay
// cannot bring it back up).
std::optional<double> simulate_schedule(const StaticProblem& problem, const ServiceProfile& profile,
                                        const StaticSchedule& schedule);

inline constexpr int kMaxSearchTasks = 4;

struct SearchResult {
    double best_time = 0.0;
    StaticSchedule best_schedule;
    std::size_t evaluated = 0;
    std::size_t feasible = 0;
};

// Exhaustive minimum over idle vectors on {0, step, ..., cap}^(n-1). Ties go
// to the lexicographically smallest vector, independent of worker count.
SearchResult min_time_search(const StaticProblem& problem, const ServiceProfile& profile, double grid_step,
                             double idle_cap, unsigned workers = 1);

struct BoundCheck {
    bool pass = false;
    double best_time = 0.0;
    double bound = 0.0;      // n / lambda_eq_max
    double tolerance = 0.0;  // 2 n Lipschitz(S) grid_step
    double margin = 0.0;     // best_time - bound
    StaticSchedule best_schedule;
};

// Default idle cap is 3 tau.
BoundCheck verify_bound(const StaticProblem& problem, const ServiceProfile& profile, const CriticalPoint& critical,
                        double grid_step, std::optional<double> idle_cap = std::nullopt, unsigned workers = 1);

}  // namespace dynq
