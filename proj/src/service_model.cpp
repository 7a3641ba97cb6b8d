#include "dynqueue/service_model.hpp"

#include "dynqueue/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dynq {

namespace {

constexpr double kBreakpointTolerance = 1e-12;
constexpr int kValidationGrid = 1000;

std::string describe(const char* what, double value) {
    std::ostringstream os;
    os.precision(17);
    os << what << " (got " << value << ")";
    return os.str();
}

void check_state(double x, const char* op) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError(std::string(op) + ": state must lie in [0,1], got " + std::to_string(x));
    }
}

void check_duration(double d, double tau, const char* op) {
    if (!(d >= 0.0)) {
        throw DomainError(std::string(op) + ": duration must be nonnegative");
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw DomainError(std::string(op) + ": tau must be positive and finite");
    }
}

double eval_unchecked(ProfileFamily family, const std::vector<double>& p, double x) {
    switch (family) {
        case ProfileFamily::constant:
            return p[0];
        case ProfileFamily::affine:
            return p[0] * x + p[1];
        case ProfileFamily::quadratic:
            return p[2] + p[0] * (x - p[1]) * (x - p[1]);
        case ProfileFamily::piecewise_linear: {
            const std::size_t m = p.size() / 2;
            std::size_t i = 0;
            while (i + 2 < m && x >= p[2 * (i + 1)]) ++i;
            const double x0 = p[2 * i], y0 = p[2 * i + 1];
            const double x1 = p[2 * i + 2], y1 = p[2 * i + 3];
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

InvalidProfile::InvalidProfile(std::vector<std::string> violations)
    : std::invalid_argument([&] {
          std::string msg = "invalid service profile:";
          for (const auto& v : violations) msg += " [" + v + "]";
          return msg;
      }()),
      violations_(std::move(violations)) {}

std::string_view to_string(ProfileFamily family) {
    switch (family) {
        case ProfileFamily::constant: return "constant";
        case ProfileFamily::affine: return "affine";
        case ProfileFamily::quadratic: return "quadratic";
        case ProfileFamily::piecewise_linear: return "piecewise-linear";
    }
    return "unknown";
}

ProfileFamily parse_family(std::string_view name) {
    if (name == "constant") return ProfileFamily::constant;
    if (name == "affine") return ProfileFamily::affine;
    if (name == "quadratic") return ProfileFamily::quadratic;
    if (name == "piecewise-linear" || name == "piecewise_linear") return ProfileFamily::piecewise_linear;
    throw DomainError("unknown profile family '" + std::string(name) + "'");
}

ValidationReport validate_profile(ProfileFamily family, std::span<const double> params) {
    ValidationReport report;
    auto& out = report.violations;

    for (double v : params) {
        if (!std::isfinite(v)) {
            out.emplace_back("parameters must be finite");
            return report;
        }
    }

    switch (family) {
        case ProfileFamily::constant:
            if (params.size() != 1) {
                out.emplace_back("constant profile takes [s]");
                return report;
            }
            if (!(params[0] > 0.0)) out.push_back(describe("positivity: s must be > 0", params[0]));
            break;

        case ProfileFamily::affine:
            if (params.size() != 2) {
                out.emplace_back("affine profile takes [a, b]");
                return report;
            }
            if (!(params[1] > 0.0)) out.push_back(describe("positivity: S(0) = b must be > 0", params[1]));
            if (!(params[0] + params[1] > 0.0)) {
                out.push_back(describe("positivity: S(1) = a + b must be > 0", params[0] + params[1]));
            }
            break;

        case ProfileFamily::quadratic: {
            if (params.size() != 3) {
                out.emplace_back("quadratic profile takes [a, c, s0]");
                return report;
            }
            const double a = params[0], c = params[1], s0 = params[2];
            if (a < 0.0) out.push_back(describe("convexity: leading coefficient must be >= 0", a));
            const double xs = std::clamp(c, 0.0, 1.0);
            const double lo = std::min({s0 + a * (xs - c) * (xs - c), s0 + a * c * c,
                                        s0 + a * (1.0 - c) * (1.0 - c)});
            if (!(lo > 0.0)) out.push_back(describe("positivity: min S on [0,1] must be > 0", lo));
            break;
        }

        case ProfileFamily::piecewise_linear: {
            if (params.size() < 4 || params.size() % 2 != 0) {
                out.emplace_back("piecewise-linear profile takes [x0, y0, x1, y1, ...] with at least two points");
                return report;
            }
            const std::size_t m = params.size() / 2;
            if (std::abs(params[0]) > kBreakpointTolerance) {
                out.push_back(describe("domain: first breakpoint must be x = 0", params[0]));
            }
            if (std::abs(params[2 * (m - 1)] - 1.0) > kBreakpointTolerance) {
                out.push_back(describe("domain: last breakpoint must be x = 1", params[2 * (m - 1)]));
            }
            bool increasing = true;
            for (std::size_t i = 0; i + 1 < m; ++i) {
                if (!(params[2 * i + 2] > params[2 * i])) increasing = false;
            }
            if (!increasing) {
                out.emplace_back("domain: breakpoints must be strictly increasing");
                return report;
            }
            for (std::size_t i = 0; i < m; ++i) {
                if (!(params[2 * i + 1] > 0.0)) {
                    out.push_back(describe("positivity: breakpoint value must be > 0", params[2 * i + 1]));
                }
            }
            double prev = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i + 1 < m; ++i) {
                const double slope =
                    (params[2 * i + 3] - params[2 * i + 1]) / (params[2 * i + 2] - params[2 * i]);
                if (slope < prev - 1e-12 * std::max(1.0, std::abs(prev))) {
                    out.push_back(describe("convexity: segment slopes must be nondecreasing", slope));
                    break;
                }
                prev = slope;
            }
            break;
        }
    }

    if (report.valid()) {
        const std::vector<double> p(params.begin(), params.end());
        for (int k = 0; k <= kValidationGrid; ++k) {
            const double x = static_cast<double>(k) / kValidationGrid;
            const double s = eval_unchecked(family, p, x);
            if (!(s > 0.0)) {
                out.push_back(describe("positivity: S <= 0 on validation grid", s));
                break;
            }
        }
    }
    return report;
}

ServiceProfile::ServiceProfile(ProfileFamily family, std::vector<double> params)
    : family_(family), params_(std::move(params)) {
    switch (family_) {
        case ProfileFamily::constant:
            s_min_ = params_[0];
            break;
        case ProfileFamily::affine:
            s_min_ = std::min(params_[1], params_[0] + params_[1]);
            break;
        case ProfileFamily::quadratic: {
            const double xs = std::clamp(params_[1], 0.0, 1.0);
            s_min_ = eval_unchecked(family_, params_, xs);
            break;
        }
        case ProfileFamily::piecewise_linear: {
            params_.front() = 0.0;
            params_[params_.size() - 2] = 1.0;
            s_min_ = params_[1];
            for (std::size_t i = 1; i < params_.size(); i += 2) s_min_ = std::min(s_min_, params_[i]);
            break;
        }
    }
    s_max_ = std::max(eval_unchecked(family_, params_, 0.0), eval_unchecked(family_, params_, 1.0));
}

ServiceProfile ServiceProfile::create(ProfileFamily family, std::vector<double> params) {
    auto report = validate_profile(family, params);
    if (!report.valid()) throw InvalidProfile(std::move(report.violations));
    return ServiceProfile(family, std::move(params));
}

ServiceProfile ServiceProfile::constant(double s) { return create(ProfileFamily::constant, {s}); }

ServiceProfile ServiceProfile::affine(double slope, double intercept) {
    return create(ProfileFamily::affine, {slope, intercept});
}

ServiceProfile ServiceProfile::quadratic(double curvature, double center, double minimum) {
    return create(ProfileFamily::quadratic, {curvature, center, minimum});
}

ServiceProfile ServiceProfile::piecewise_linear(std::vector<double> xy) {
    return create(ProfileFamily::piecewise_linear, std::move(xy));
}

double ServiceProfile::operator()(double x) const {
    check_state(x, "service time");
    return eval_unchecked(family_, params_, x);
}

std::size_t ServiceProfile::segment_right(double x) const {
    const std::size_t m = params_.size() / 2;
    std::size_t i = 0;
    while (i + 2 < m && x >= params_[2 * (i + 1)]) ++i;
    return i;
}

std::size_t ServiceProfile::segment_left(double x) const {
    const std::size_t m = params_.size() / 2;
    std::size_t i = 0;
    while (i + 2 < m && x > params_[2 * (i + 1)]) ++i;
    return i;
}

double ServiceProfile::segment_slope(std::size_t i) const {
    return (params_[2 * i + 3] - params_[2 * i + 1]) / (params_[2 * i + 2] - params_[2 * i]);
}

double ServiceProfile::right_slope(double x) const {
    check_state(x, "right slope");
    switch (family_) {
        case ProfileFamily::constant: return 0.0;
        case ProfileFamily::affine: return params_[0];
        case ProfileFamily::quadratic: return 2.0 * params_[0] * (x - params_[1]);
        case ProfileFamily::piecewise_linear: return segment_slope(segment_right(x));
    }
    return 0.0;
}

double ServiceProfile::left_slope(double x) const {
    check_state(x, "left slope");
    if (family_ == ProfileFamily::piecewise_linear) return segment_slope(segment_left(x));
    return right_slope(x);
}

double ServiceProfile::lipschitz() const noexcept {
    switch (family_) {
        case ProfileFamily::constant: return 0.0;
        case ProfileFamily::affine: return std::abs(params_[0]);
        case ProfileFamily::quadratic:
            return 2.0 * params_[0] * std::max(std::abs(params_[1]), std::abs(1.0 - params_[1]));
        case ProfileFamily::piecewise_linear: {
            double best = 0.0;
            for (std::size_t i = 0; i + 1 < params_.size() / 2; ++i) {
                best = std::max(best, std::abs(segment_slope(i)));
            }
            return best;
        }
    }
    return 0.0;
}

double eval_service_time(const ServiceProfile& profile, double x) { return profile(x); }

Extrema profile_extrema(const ServiceProfile& profile) { return {profile.s_min(), profile.s_max()}; }

double clamp_state(double x) {
    if (std::isnan(x) || x < -kStateClampTolerance || x > 1.0 + kStateClampTolerance) {
        throw InternalConsistencyError("server state left [0,1] beyond rounding tolerance: " +
                                       std::to_string(x));
    }
    return std::clamp(x, 0.0, 1.0);
}

double busy_update(double x, double d, double tau) {
    check_state(x, "busy_update");
    check_duration(d, tau, "busy_update");
    return clamp_state(1.0 - (1.0 - x) * std::exp(-d / tau));
}

double idle_update(double x, double d, double tau) {
    check_state(x, "idle_update");
    check_duration(d, tau, "idle_update");
    return clamp_state(x * std::exp(-d / tau));
}

double idle_time_to_reach(double x_from, double x_to, double tau) {
    check_state(x_from, "idle_time_to_reach");
    check_state(x_to, "idle_time_to_reach");
    check_duration(0.0, tau, "idle_time_to_reach");
    if (x_to > x_from) {
        throw InfeasibleError("idle decay cannot raise the state from " + std::to_string(x_from) + " to " +
                              std::to_string(x_to));
    }
    if (x_to == x_from) return 0.0;
    if (x_to == 0.0) return std::numeric_limits<double>::infinity();
    return tau * std::log(x_from / x_to);
}

}  // namespace dynq
