#include "support.hpp"

#include "dynqueue/errors.hpp"
#include "dynqueue/simulator.hpp"
#include "dynqueue/stability.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dynq;

namespace {

SimConfig config(double lambda, double x0, std::int64_t n0, std::int64_t horizon) {
    SimConfig c;
    c.lambda = lambda;
    c.x0 = x0;
    c.n0 = n0;
    c.horizon_tasks = horizon;
    return c;
}

// Supremum of {x : g(x) > period} by bisection on the definition.
double x_tilde_by_bisection(const ServiceProfile& s, double tau, double period) {
    double lo = 0.0;
    double hi = 1.0;
    if (eval_g(1.0, s, tau) > period) return 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (eval_g(mid, s, tau) > period ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace

TEST_CASE("g function") {
    const auto q = test::reference_quadratic();
    const double x_min = -std::expm1(-1.0);
    CHECK(eval_g(x_min, q, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::isinf(eval_g(0.0, q, 1.0)));
    double previous = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 1000; ++i) {
        const double v = eval_g(i / 1000.0, q, 1.0);
        CHECK(v < previous);
        previous = v;
    }
}

TEST_CASE("stability constants for the reference profile") {
    const auto q = test::reference_quadratic();
    const auto c = critical_rate(q, 1.0);
    const auto k = compute_constants(q, 1.0, c);
    // Frozen from tests/oracles/reference_values.py.
    CHECK(k.x_min == doctest::Approx(0.6321205588285576784).epsilon(1e-14));
    CHECK(k.x_l1 == doctest::Approx(0.42645822566055635248).epsilon(1e-10));
    CHECK(k.x_l2 == doctest::Approx(0.059421484349496089335).epsilon(1e-9));
    CHECK(k.x_u1 == doctest::Approx(0.8136740817827461617).epsilon(1e-10));
    CHECK(k.x_u2 == doctest::Approx(0.96467117021858213356).epsilon(1e-10));
    CHECK(k.x_L == doctest::Approx(0.059421484349496089335).epsilon(1e-9));
    CHECK(k.x_U == doctest::Approx(0.96467117021858213356).epsilon(1e-10));
    CHECK(k.c1 == doctest::Approx(2.8230994286219198385).epsilon(1e-9));
    CHECK(k.c2 == doctest::Approx(3.3430559406782458089).epsilon(1e-9));
    CHECK(k.c == doctest::Approx(8.1661553693001656474).epsilon(1e-9));
    CHECK(k.x_tilde == doctest::Approx(x_tilde_by_bisection(q, 1.0, 1.0 / c.lambda_eq_max)).epsilon(1e-12));
}

TEST_CASE("stability constants across profiles") {
    for (const auto& s : test::profile_matrix()) {
        for (double tau : {0.5, 1.0, 2.0}) {
            const auto c = critical_rate(s, tau);
            if (c.degenerate) {
                CHECK_THROWS_AS(compute_constants(s, tau, c), RefusedError);
                continue;
            }
            const double period = 1.0 / c.lambda_eq_max;
            const auto k = compute_constants(s, tau, c);
            CHECK(s(1.0) > period);
            CHECK(std::abs(s(k.x_u1) - period) <= 1e-9);
            CHECK(k.x_u1 >= c.x_th);
            CHECK(0.0 < k.x_L);
            CHECK(k.x_L < k.x_U);
            CHECK(k.x_U < 1.0);
            CHECK(k.c1 > 0.0);
            CHECK(k.c2 > 0.0);
            CHECK(k.c == doctest::Approx(k.c1 + k.c2 + s.s_max()));
            const double xt = x_tilde_by_bisection(s, tau, period);
            CHECK(k.x_tilde == doctest::Approx(xt).epsilon(1e-12));
        }
    }
}

TEST_CASE("cycles outside the band are slower than the critical period") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& s : test::profile_matrix()) {
        const double tau = 1.0;
        const auto c = critical_rate(s, tau);
        if (c.degenerate) continue;
        const auto k = compute_constants(s, tau, c);
        const double period = 1.0 / c.lambda_eq_max;
        const auto sample = [&](bool low) {
            return low ? k.x_L * u(rng) : k.x_U + (1.0 - k.x_U) * u(rng);
        };
        int checked = 0;
        for (int i = 0; i < 4000; ++i) {
            const bool low_i = (i & 1) != 0;
            const bool low_next = (i & 2) != 0;
            const double xi = sample(low_i);
            const double xn = sample(low_next);
            const double after = busy_update(xi, s(xi), tau);
            if (xn > after || xn == 0.0) continue;  // decay cannot raise the state
            const double gap = s(xi) + tau * std::log(after / xn);
            CHECK(gap > period);
            ++checked;
        }
        CHECK(checked > 1000);
    }
}

TEST_CASE("queue upper bound") {
    const auto q = test::reference_quadratic();
    const auto c = critical_rate(q, 1.0);
    const auto b = queue_upper_bound(q, 1.0, 0.9 * c.lambda_eq_max, c, c.x_th, 5);
    CHECK(b.n_t1 == 4);
    CHECK(b.bound == b.n_t1 + b.rise_increment + b.idle_increment);
    CHECK(queue_upper_bound(q, 1.0, 0.9 * c.lambda_eq_max, c, 0.2, 5).n_t1 == 4);
    CHECK(queue_upper_bound(q, 1.0, 0.9 * c.lambda_eq_max, c, 0.0, 0).n_t1 == 0);
    // Starting above the threshold adds the arrivals during the initial idle.
    const double lambda = c.lambda_eq_max;
    const auto high = queue_upper_bound(q, 1.0, lambda, c, 1.0, 10);
    CHECK(high.n_t1 == 9 + static_cast<std::int64_t>(std::floor(lambda * std::log(1.0 / c.x_th))));
    // A negative rise increment is kept as is.
    const auto slow = queue_upper_bound(q, 1.0, 0.1, c, c.x_th, 0);
    CHECK(slow.rise_increment <= 0);

    CHECK_THROWS_AS(queue_upper_bound(q, 1.0, 1.01 * c.lambda_eq_max, c, 0.5, 0), RefusedError);
    const auto d = critical_rate(ServiceProfile::constant(2.0), 1.0);
    CHECK_THROWS_AS(queue_upper_bound(ServiceProfile::constant(2.0), 1.0, 0.4, d, 0.5, 0), RefusedError);
}

TEST_CASE("overload lower bound") {
    StabilityConstants k;
    k.c = 3.0;
    CHECK(overload_lower_bound(k, 2.0, 1.0, 7, 0) == doctest::Approx(1.0));
    const double eps = 0.05;
    const double b0 = overload_lower_bound(k, 1.0 + eps, 1.0, 4, 0);
    CHECK(overload_lower_bound(k, 1.0 + eps, 1.0, 4, 10) - b0 == doctest::Approx(10 * eps));
    CHECK_THROWS_AS(overload_lower_bound(k, 1.0, 1.0, 4, 0), RefusedError);
}

TEST_CASE("classification") {
    const auto q = test::reference_quadratic();
    const auto c = critical_rate(q, 1.0);
    const auto policy = PolicySpec::threshold_at(c.x_th);

    const double stable_rate = 0.9 * c.lambda_eq_max;
    const auto stable = run(config(stable_rate, 1.0, 10, 20000), q, policy);
    const auto cs = classify(stable, q, 1.0, stable_rate, c);
    CHECK(cs.verdict == Verdict::stable);
    REQUIRE(cs.bound.has_value());
    CHECK(cs.max_queue_at_starts <= cs.bound->bound);

    const double over_rate = 1.05 * c.lambda_eq_max;
    const auto over = run(config(over_rate, 0.0, 0, 20000), q, policy);
    const auto cu = classify(over, q, 1.0, over_rate, c);
    CHECK(cu.verdict == Verdict::unstable);
    CHECK_FALSE(cu.bound.has_value());

    const auto over_on = run(config(over_rate, 0.0, 0, 20000), q, PolicySpec::always_on());
    CHECK(classify(over_on, q, 1.0, over_rate, c).verdict == Verdict::unstable);

    const auto two = run(config(stable_rate, 0.0, 0, 2), q, policy);
    CHECK(classify(two, q, 1.0, stable_rate, c).verdict == Verdict::inconclusive);

    CHECK(to_string(Verdict::stable) == "stable");
    CHECK(to_string(Verdict::unstable) == "unstable");
    CHECK(to_string(Verdict::inconclusive) == "inconclusive");
}

TEST_CASE("overload check along a simulated run") {
    const auto q = test::reference_quadratic();
    const auto c = critical_rate(q, 1.0);
    const auto k = compute_constants(q, 1.0, c);
    const double lambda = 1.05 * c.lambda_eq_max;
    const auto tr = run(config(lambda, 0.0, 0, 20000), q, PolicySpec::threshold_at(c.x_th));
    const auto check = check_overload_bound(tr, k, lambda, c.lambda_eq_max);
    CHECK(check.band_starts > 0);
    CHECK(check.holds);
    CHECK(check.min_margin >= 0.0);
}
