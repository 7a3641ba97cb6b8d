#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dynq {

enum class ProfileFamily { constant, affine, quadratic, piecewise_linear };

std::string_view to_string(ProfileFamily family);
// Accepts "constant", "affine", "quadratic", "piecewise-linear" (or
// "piecewise_linear"). Throws DomainError on anything else.
ProfileFamily parse_family(std::string_view name);

struct ValidationReport {
    std::vector<std::string> violations;

    bool valid() const noexcept { return violations.empty(); }
};

// Checks positivity, convexity and continuity of a candidate service-time
// map. Parameter layouts:
//   constant          [s]                 S(x) = s
//   affine            [a, b]              S(x) = a*x + b
//   quadratic         [a, c, s0]          S(x) = s0 + a*(x - c)^2
//   piecewise-linear  [x0, y0, x1, y1...] breakpoints with x0 = 0, xn = 1
ValidationReport validate_profile(ProfileFamily family, std::span<const double> params);

// Convex, positive service-time map S : [0,1] -> (0, inf).
//
// Instances only exist in validated form: the factory throws InvalidProfile
// with the violation list, so every other module may assume the hypotheses
// hold.
class ServiceProfile {
public:
    static ServiceProfile create(ProfileFamily family, std::vector<double> params);

    static ServiceProfile constant(double s);
    static ServiceProfile affine(double slope, double intercept);
    static ServiceProfile quadratic(double curvature, double center, double minimum);
    static ServiceProfile piecewise_linear(std::vector<double> xy);

    ProfileFamily family() const noexcept { return family_; }
    const std::vector<double>& params() const noexcept { return params_; }

    double s_min() const noexcept { return s_min_; }
    double s_max() const noexcept { return s_max_; }

    // S(x); throws DomainError for x outside [0,1].
    double operator()(double x) const;

    // One-sided derivatives. At x = 1 the right slope is the left slope and at
    // x = 0 the left slope is the right slope.
    double right_slope(double x) const;
    double left_slope(double x) const;

    // sup |S'| on [0,1].
    double lipschitz() const noexcept;

private:
    ServiceProfile(ProfileFamily family, std::vector<double> params);

    std::size_t segment_right(double x) const;
    std::size_t segment_left(double x) const;
    double segment_slope(std::size_t i) const;

    ProfileFamily family_;
    std::vector<double> params_;
    double s_min_ = 0.0;
    double s_max_ = 0.0;
};

struct ServerParams {
    double tau = 1.0;
};

struct ServerState {
    double x = 0.0;
    bool busy = false;
};

// Clamp tolerance for rounding at the ends of [0,1]; anything further out
// raises InternalConsistencyError.
inline constexpr double kStateClampTolerance = 1e-12;

double eval_service_time(const ServiceProfile& profile, double x);

struct Extrema {
    double s_min;
    double s_max;
};
Extrema profile_extrema(const ServiceProfile& profile);

// Closed-form solutions of x' = (b - x) / tau over a duration d.
double busy_update(double x, double d, double tau);
double idle_update(double x, double d, double tau);

// Idle duration taking the state from x_from down to x_to. Returns +inf when
// x_to = 0 < x_from; throws InfeasibleError when x_to > x_from.
double idle_time_to_reach(double x_from, double x_to, double tau);

// Snaps values within kStateClampTolerance of [0,1] onto it.
double clamp_state(double x);

}  // namespace dynq
