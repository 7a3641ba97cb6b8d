#pragma once

#include "dynqueue/policy.hpp"
#include "dynqueue/service_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace dynq {

enum class RecordGranularity { events, service_starts };

struct SimConfig {
    double lambda = 0.0;  // arrivals at k / lambda, k >= 1; 0 means no arrivals
    double tau = 1.0;
    double x0 = 0.0;
    std::int64_t n0 = 0;  // tasks waiting at t = 0
    std::int64_t horizon_tasks = 1;
    RecordGranularity record = RecordGranularity::events;
};

enum class EventKind { arrival, service_start, service_end, idle_release };

std::string_view to_string(EventKind kind);

// Queue length n counts waiting tasks only (the task in service is excluded)
// and is recorded after the event has been applied.
struct Event {
    double t;
    EventKind kind;
    double x;
    std::int64_t n;
};

struct ServiceStart {
    double t;
    double x;
    std::int64_t n;
};

struct TrajectorySummary {
    std::int64_t max_queue = 0;            // over t = 0 and every event
    std::int64_t max_queue_at_starts = 0;  // over service starts only
    std::int64_t final_queue = 0;
    std::int64_t completions = 0;
    std::int64_t arrivals = 0;
    double end_time = 0.0;
    std::vector<ServiceStart> service_starts;
    std::vector<double> service_end_states;
};

struct Trajectory {
    SimConfig config;
    PolicySpec policy;
    std::vector<Event> events;
    TrajectorySummary summary;
};

// Exact event-driven run. Coincident events (within a relative 1e-12) are
// processed as service end, then arrival, then release. Stops after
// config.horizon_tasks completions, or once the queue is empty with no
// arrivals left.
Trajectory run(const SimConfig& config, const ServiceProfile& profile, const PolicySpec& policy);

// Next service-start state under always-on when every task finishes before
// the next arrival. Requires S(x) <= 1/lambda.
double fixed_point_map(const ServiceProfile& profile, double tau, double lambda, double x);

struct GrowthEstimate {
    double slope;     // tasks per unit time
    double residual;  // RMS of the fit
};

// Least-squares slope of n(t_i) against t_i over the trailing half of the
// service starts. Needs at least 10 starts.
GrowthEstimate growth_rate_estimate(const Trajectory& trajectory);

inline constexpr std::size_t kMinStartsForGrowth = 10;

// One row per event: t,kind,x,n.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

}  // namespace dynq
