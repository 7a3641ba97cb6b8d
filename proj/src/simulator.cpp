#include "dynqueue/simulator.hpp"

#include "dynqueue/errors.hpp"
#include "dynqueue/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace dynq {

namespace {

double merge_tolerance(double t) { return 1e-12 * std::max(1.0, std::abs(t)); }

void validate(const SimConfig& c, const PolicySpec& policy) {
    if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw DomainError("simulation: lambda must be >= 0");
    if (!(c.tau > 0.0) || !std::isfinite(c.tau)) throw DomainError("simulation: tau must be positive");
    if (!(c.x0 >= 0.0 && c.x0 <= 1.0)) throw DomainError("simulation: x0 must lie in [0,1]");
    if (c.n0 < 0) throw DomainError("simulation: n0 must be >= 0");
    if (c.horizon_tasks < 1) throw DomainError("simulation: horizon must be >= 1 task");
    if (policy.kind == PolicyKind::threshold && !(policy.threshold > 0.0 && policy.threshold <= 1.0)) {
        throw DomainError("simulation: threshold must lie in (0,1]");
    }
}

// Mutable state of one run. The server state between events is always
// derived in closed form from the last anchor (the most recent service
// start or end), so no error accumulates across arrivals.
class Engine {
public:
    Engine(const SimConfig& config, const ServiceProfile& profile, const PolicySpec& policy)
        : cfg_(config), profile_(profile), policy_(policy) {
        traj_.config = config;
        traj_.policy = policy;
        anchor_x_ = config.x0;
        n_ = config.n0;
        traj_.summary.max_queue = n_;
        traj_.events.reserve(static_cast<std::size_t>(std::min<std::int64_t>(config.horizon_tasks, 1 << 20)) * 3);
        traj_.summary.service_starts.reserve(static_cast<std::size_t>(std::min<std::int64_t>(config.horizon_tasks, 1 << 20)));
    }

    Trajectory run() {
        while (completions_ < cfg_.horizon_tasks) {
            if (busy_) {
                const double ta = next_arrival();
                if (end_t_ <= ta + merge_tolerance(end_t_)) {
                    finish_service();
                } else {
                    arrive(ta);
                }
                continue;
            }
            if (n_ > 0) {
                const double cross = anchor_t_ + earliest_release_delay(policy_, anchor_x_, cfg_.tau);
                const double release_t = std::max(t_, cross);
                const double ta = next_arrival();
                if (ta <= release_t + merge_tolerance(release_t)) {
                    arrive(ta);
                } else {
                    release(release_t, cross);
                }
                continue;
            }
            if (cfg_.lambda == 0.0) break;
            arrive(next_arrival());
        }
        traj_.summary.final_queue = n_;
        traj_.summary.completions = completions_;
        traj_.summary.arrivals = arrivals_;
        traj_.summary.end_time = t_;
        return std::move(traj_);
    }

private:
    double next_arrival() const {
        if (cfg_.lambda == 0.0) return std::numeric_limits<double>::infinity();
        return static_cast<double>(arrivals_ + 1) / cfg_.lambda;
    }

    double state_at(double t) const {
        const double d = std::max(0.0, t - anchor_t_);
        return busy_ ? busy_update(anchor_x_, d, cfg_.tau) : idle_update(anchor_x_, d, cfg_.tau);
    }

    void record(EventKind kind, double x) {
        traj_.summary.max_queue = std::max(traj_.summary.max_queue, n_);
        if (cfg_.record == RecordGranularity::events || kind == EventKind::service_start) {
            traj_.events.push_back({t_, kind, x, n_});
        }
    }

    void arrive(double ta) {
        t_ = std::max(t_, ta);
        ++arrivals_;
        ++n_;
        record(EventKind::arrival, state_at(t_));
    }

    void finish_service() {
        t_ = end_t_;
        anchor_t_ = t_;
        anchor_x_ = end_x_;
        busy_ = false;
        ++completions_;
        traj_.summary.service_end_states.push_back(end_x_);
        record(EventKind::service_end, end_x_);
    }

    void release(double release_t, double cross) {
        double x;
        if (release_t == cross && cross > anchor_t_) {
            // Exact threshold crossing.
            x = policy_.threshold;
        } else {
            x = state_at(release_t);
        }
        const bool held = release_t > t_;
        t_ = release_t;
        if (held) record(EventKind::idle_release, x);

        --n_;
        busy_ = true;
        anchor_t_ = t_;
        anchor_x_ = x;
        const double s = profile_(x);
        end_t_ = t_ + s;
        end_x_ = busy_update(x, s, cfg_.tau);
        traj_.summary.service_starts.push_back({t_, x, n_});
        traj_.summary.max_queue_at_starts =
            traj_.summary.service_starts.size() == 1 ? n_ : std::max(traj_.summary.max_queue_at_starts, n_);
        record(EventKind::service_start, x);
    }

    const SimConfig& cfg_;
    const ServiceProfile& profile_;
    const PolicySpec& policy_;
    Trajectory traj_;

    double t_ = 0.0;
    double anchor_t_ = 0.0;
    double anchor_x_ = 0.0;
    bool busy_ = false;
    double end_t_ = 0.0;
    double end_x_ = 0.0;
    std::int64_t n_ = 0;
    std::int64_t arrivals_ = 0;
    std::int64_t completions_ = 0;
};

}  // namespace

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::arrival: return "arrival";
        case EventKind::service_start: return "service_start";
        case EventKind::service_end: return "service_end";
        case EventKind::idle_release: return "idle_release";
    }
    return "unknown";
}

Trajectory run(const SimConfig& config, const ServiceProfile& profile, const PolicySpec& policy) {
    validate(config, policy);
    return Engine(config, profile, policy).run();
}

double fixed_point_map(const ServiceProfile& profile, double tau, double lambda, double x) {
    if (!(tau > 0.0) || !(lambda > 0.0)) throw DomainError("fixed_point_map: tau and lambda must be positive");
    const double s = profile(x);
    const double period = 1.0 / lambda;
    if (s > period * (1.0 + 1e-12)) {
        throw DomainError("fixed_point_map: S(x) exceeds the inter-arrival time; recursion does not apply");
    }
    // (x - 1 + e^{S/tau}) e^{-1/(lambda tau)}, rearranged to avoid overflow.
    return clamp_state((x - 1.0) * std::exp(-period / tau) + std::exp((s - period) / tau));
}

GrowthEstimate growth_rate_estimate(const Trajectory& trajectory) {
    const auto& starts = trajectory.summary.service_starts;
    if (starts.size() < kMinStartsForGrowth) {
        throw DomainError("growth_rate_estimate: need at least " + std::to_string(kMinStartsForGrowth) +
                          " service starts, got " + std::to_string(starts.size()));
    }
    const std::size_t first = starts.size() / 2;
    const auto count = static_cast<double>(starts.size() - first);
    double mean_t = 0.0, mean_n = 0.0;
    for (std::size_t i = first; i < starts.size(); ++i) {
        mean_t += starts[i].t;
        mean_n += static_cast<double>(starts[i].n);
    }
    mean_t /= count;
    mean_n /= count;
    double stt = 0.0, stn = 0.0;
    for (std::size_t i = first; i < starts.size(); ++i) {
        const double dt = starts[i].t - mean_t;
        stt += dt * dt;
        stn += dt * (static_cast<double>(starts[i].n) - mean_n);
    }
    if (!(stt > 0.0)) throw DomainError("growth_rate_estimate: service starts share a single time stamp");
    const double slope = stn / stt;
    double sse = 0.0;
    for (std::size_t i = first; i < starts.size(); ++i) {
        const double r = static_cast<double>(starts[i].n) - (mean_n + slope * (starts[i].t - mean_t));
        sse += r * r;
    }
    return {slope, std::sqrt(sse / count)};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
    os << "t,kind,x,n\n";
    for (const auto& e : trajectory.events) {
        os << format_real(e.t) << ',' << to_string(e.kind) << ',' << format_real(e.x) << ',' << e.n << '\n';
    }
}

}  // namespace dynq
