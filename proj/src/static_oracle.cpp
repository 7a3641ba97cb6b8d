#include "dynqueue/static_oracle.hpp"

#include "dynqueue/errors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>

namespace dynq {

namespace {

void validate_problem(const StaticProblem& p) {
    if (!(p.x > 0.0 && p.x < 1.0)) throw DomainError("static problem: boundary state must lie in (0,1)");
    if (!(p.tau > 0.0)) throw DomainError("static problem: tau must be positive");
    if (p.n < 1) throw DomainError("static problem: need at least one task");
}

struct Partial {
    double time = std::numeric_limits<double>::infinity();
    std::vector<int> index;
    std::size_t evaluated = 0;
    std::size_t feasible = 0;
};

// Depth-first enumeration in lexicographic order of the idle indices; the
// state and elapsed time of each prefix are shared by all its extensions.
class Enumerator {
public:
    Enumerator(const StaticProblem& p, const ServiceProfile& s, double step, int levels)
        : problem_(p), profile_(s), step_(step), levels_(levels), index_(static_cast<std::size_t>(p.n - 1), 0) {}

    Partial run(int first_lo, int first_hi) {
        const double s = profile_(problem_.x);
        const double x1 = busy_update(problem_.x, s, problem_.tau);
        if (problem_.n == 1) {
            finish(x1, s);
        } else {
            for (int k = first_lo; k < first_hi; ++k) {
                index_[0] = k;
                descend(1, x1, s, k);
            }
        }
        return std::move(best_);
    }

private:
    void descend(int task, double x_after, double t, int k) {
        const double d = k * step_;
        const double x = idle_update(x_after, d, problem_.tau);
        const double s = profile_(x);
        const double next = busy_update(x, s, problem_.tau);
        const double elapsed = t + d + s;
        if (task + 1 == problem_.n) {
            finish(next, elapsed);
            return;
        }
        for (int j = 0; j < levels_; ++j) {
            index_[static_cast<std::size_t>(task)] = j;
            descend(task + 1, next, elapsed, j);
        }
    }

    void finish(double x_final, double elapsed) {
        ++best_.evaluated;
        if (x_final < problem_.x) return;
        ++best_.feasible;
        const double total = elapsed + problem_.tau * std::log(x_final / problem_.x);
        if (total < best_.time) {
            best_.time = total;
            best_.index = index_;
        }
    }

    const StaticProblem& problem_;
    const ServiceProfile& profile_;
    double step_;
    int levels_;
    std::vector<int> index_;
    Partial best_;
};

}  // namespace

std::optional<double> simulate_schedule(const StaticProblem& problem, const ServiceProfile& profile,
                                        const StaticSchedule& schedule) {
    validate_problem(problem);
    if (schedule.idle_before.size() != static_cast<std::size_t>(problem.n)) {
        throw DomainError("simulate_schedule: schedule has " + std::to_string(schedule.idle_before.size()) +
                          " entries for " + std::to_string(problem.n) + " tasks");
    }
    double x = problem.x;
    double elapsed = 0.0;
    for (double d : schedule.idle_before) {
        if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("simulate_schedule: idle durations must be >= 0");
        x = idle_update(x, d, problem.tau);
        const double s = profile(x);
        elapsed += d + s;
        x = busy_update(x, s, problem.tau);
    }
    if (x < problem.x) return std::nullopt;
    return elapsed + problem.tau * std::log(x / problem.x);
}

SearchResult min_time_search(const StaticProblem& problem, const ServiceProfile& profile, double grid_step,
                             double idle_cap, unsigned workers) {
    validate_problem(problem);
    if (problem.n > kMaxSearchTasks) {
        throw DomainError("min_time_search: exhaustive search supports n <= " + std::to_string(kMaxSearchTasks));
    }
    if (!(grid_step > 0.0) || !(idle_cap >= 0.0)) {
        throw DomainError("min_time_search: grid step must be positive and idle cap nonnegative");
    }
    const int levels = static_cast<int>(std::floor(idle_cap / grid_step + 1e-9)) + 1;

    std::vector<Partial> parts;
    if (problem.n == 1 || workers <= 1) {
        parts.push_back(Enumerator(problem, profile, grid_step, levels).run(0, levels));
    } else {
        const int chunks = static_cast<int>(std::min<unsigned>(workers, static_cast<unsigned>(levels)));
        std::vector<std::future<Partial>> futures;
        for (int c = 0; c < chunks; ++c) {
            const int lo = levels * c / chunks;
            const int hi = levels * (c + 1) / chunks;
            futures.push_back(std::async(std::launch::async, [&, lo, hi] {
                return Enumerator(problem, profile, grid_step, levels).run(lo, hi);
            }));
        }
        for (auto& f : futures) parts.push_back(f.get());
    }

    // Chunks cover increasing first indices, so a strict comparison keeps the
    // lexicographically first minimizer.
    SearchResult result;
    const Partial* best = nullptr;
    for (const auto& p : parts) {
        result.evaluated += p.evaluated;
        result.feasible += p.feasible;
        if (p.feasible > 0 && (best == nullptr || p.time < best->time)) best = &p;
    }
    if (best == nullptr) throw InfeasibleError("min_time_search: no feasible schedule on the idle grid");
    result.best_time = best->time;
    result.best_schedule.idle_before.assign(1, 0.0);
    for (int k : best->index) result.best_schedule.idle_before.push_back(k * grid_step);
    return result;
}

BoundCheck verify_bound(const StaticProblem& problem, const ServiceProfile& profile, const CriticalPoint& critical,
                        double grid_step, std::optional<double> idle_cap, unsigned workers) {
    const auto search = min_time_search(problem, profile, grid_step, idle_cap.value_or(3.0 * problem.tau), workers);
    BoundCheck check;
    check.best_time = search.best_time;
    check.best_schedule = search.best_schedule;
    check.bound = problem.n / critical.lambda_eq_max;
    check.tolerance = 2.0 * problem.n * profile.lipschitz() * grid_step;
    check.margin = check.best_time - check.bound;
    check.pass = check.best_time >= check.bound - check.tolerance;
    return check;
}

}  // namespace dynq
