#pragma once

#include <string_view>

namespace dynq {

enum class PolicyKind { always_on, threshold };

enum class Release { on, off };

// Task release rule as a function of the current server state.
struct PolicySpec {
    PolicyKind kind = PolicyKind::always_on;
    double threshold = 1.0;  // used when kind == threshold; must lie in (0,1]

    static PolicySpec always_on() { return {PolicyKind::always_on, 1.0}; }
    static PolicySpec threshold_at(double value);
};

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

// Threshold comparison is inclusive: x == threshold releases.
Release decide(const PolicySpec& policy, double x);

// Idle time until decide() turns ON, assuming the state decays from x.
double earliest_release_delay(const PolicySpec& policy, double x, double tau);

}  // namespace dynq
