#include "dynqueue/policy.hpp"

#include "dynqueue/errors.hpp"
#include "dynqueue/service_model.hpp"

#include <cmath>
#include <string>

namespace dynq {

PolicySpec PolicySpec::threshold_at(double value) {
    if (!(value > 0.0 && value <= 1.0)) {
        throw DomainError("threshold must lie in (0,1], got " + std::to_string(value));
    }
    return {PolicyKind::threshold, value};
}

std::string_view to_string(PolicyKind kind) {
    return kind == PolicyKind::threshold ? "threshold" : "always_on";
}

PolicyKind parse_policy_kind(std::string_view name) {
    if (name == "always_on" || name == "always-on") return PolicyKind::always_on;
    if (name == "threshold") return PolicyKind::threshold;
    throw DomainError("unknown policy kind '" + std::string(name) + "'");
}

Release decide(const PolicySpec& policy, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("decide: state must lie in [0,1]");
    if (policy.kind == PolicyKind::always_on) return Release::on;
    return x <= policy.threshold ? Release::on : Release::off;
}

double earliest_release_delay(const PolicySpec& policy, double x, double tau) {
    if (!(tau > 0.0)) throw DomainError("earliest_release_delay: tau must be positive");
    if (decide(policy, x) == Release::on) return 0.0;
    // Rounding in the exponential can leave the decayed state an ulp above
    // the threshold; step the delay up until the release actually fires.
    double d = tau * std::log(x / policy.threshold);
    while (idle_update(x, d, tau) > policy.threshold) d = std::nextafter(d, HUGE_VAL);
    return d;
}

}  // namespace dynq
