#include <doctest.h>

#include <cmath>

#include "isofiber/quadrature.hpp"

using namespace isofiber;

TEST_SUITE_BEGIN("quadrature");

TEST_CASE("finite integrals") {
    auto cubic = [](double t) { return t * t * t - 2.0 * t + 1.0; };
    QuadResult q = integrate(cubic, 0.0, 2.0);
    CHECK(q.converged());
    CHECK(q.value == doctest::Approx(2.0).epsilon(1e-12));

    QuadResult s = integrate([](double t) { return std::sin(t); }, 0.0, M_PI);
    CHECK(s.value == doctest::Approx(2.0).epsilon(1e-12));

    QuadResult rev = integrate(cubic, 2.0, 0.0);
    CHECK(rev.value == doctest::Approx(-2.0).epsilon(1e-12));

    CHECK(integrate(cubic, 1.0, 1.0).value == 0.0);
}

TEST_CASE("improper convergent tails") {
    auto inv_sq = [](double t) { return 1.0 / (t * t); };
    QuadResult q = integrate_to_endpoint(inv_sq, 1.0, std::numeric_limits<double>::infinity());
    CHECK(q.status == QuadStatus::converged);
    CHECK(q.value == doctest::Approx(1.0).epsilon(1e-9));

    auto inv_sqrt = [](double t) { return 1.0 / std::sqrt(t); };
    QuadResult p = integrate_to_endpoint(inv_sqrt, 1.0, 0.0);
    CHECK(p.status == QuadStatus::converged);
    CHECK(p.value == doctest::Approx(-2.0).epsilon(1e-8));  // oriented from 1 toward 0

    auto decay = [](double t) { return std::exp(-t); };
    QuadResult e = integrate_to_endpoint(decay, 0.0, std::numeric_limits<double>::infinity());
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("improper divergent tails") {
    auto inv = [](double t) { return 1.0 / t; };
    // Constant tails per doubling: divergent.
    CHECK(integrate_to_endpoint(inv, 1.0, std::numeric_limits<double>::infinity()).status ==
          QuadStatus::divergent);
    CHECK(integrate_to_endpoint(inv, 1.0, 0.0).status == QuadStatus::divergent);

    auto inv_sq = [](double t) { return 1.0 / (t * t); };
    CHECK(integrate_to_endpoint(inv_sq, 1.0, 0.0).status == QuadStatus::divergent);

    auto blow = [](double t) { return std::exp(t * t); };
    CHECK(integrate_to_endpoint(blow, 1.0, std::numeric_limits<double>::infinity()).status ==
          QuadStatus::divergent);
}

TEST_CASE("slowly convergent tail is inconclusive, not misclassified as divergent") {
    // 1/(t log^2 t) converges at infinity but the tails shrink like 1/k^2;
    // the budget runs out before the tolerance is met.
    auto f = [](double t) { return 1.0 / (t * std::log(t) * std::log(t)); };
    QuadResult q = integrate_to_endpoint(f, 2.0, std::numeric_limits<double>::infinity());
    CHECK(q.status != QuadStatus::divergent);
}

TEST_CASE("endpoint limits") {
    const double inf = std::numeric_limits<double>::infinity();
    auto quad = [](double t) { return 4.0 * M_PI * t * t; };
    CHECK(limit_at_endpoint(quad, 1.0, 0.0, 4.0 * M_PI).kind == LimitKind::zero);
    CHECK(limit_at_endpoint(quad, 1.0, inf, 4.0 * M_PI).kind == LimitKind::infinite);

    auto invr = [](double t) { return 4.0 * M_PI / t; };
    CHECK(limit_at_endpoint(invr, 1.0, 0.0, 4.0 * M_PI).kind == LimitKind::infinite);
    CHECK(limit_at_endpoint(invr, 1.0, inf, 4.0 * M_PI).kind == LimitKind::zero);

    auto toward = [](double t) { return 4.0 * M_PI * (1.0 - std::exp(-t)); };
    LimitEstimate l = limit_at_endpoint(toward, 1.0, inf, 4.0 * M_PI);
    CHECK(l.kind == LimitKind::positive);
    CHECK(l.value == doctest::Approx(4.0 * M_PI).epsilon(1e-6));

    auto constant = [](double) { return 2.5; };
    LimitEstimate c = limit_at_endpoint(constant, 1.0, 0.0, 2.5);
    CHECK(c.kind == LimitKind::positive);
    CHECK(c.value == doctest::Approx(2.5));

    // Overflow while growing counts as an infinite limit.
    auto steep = [](double t) { return std::exp(t * t); };
    CHECK(limit_at_endpoint(steep, 1.0, inf, 1.0).kind == LimitKind::infinite);
}

TEST_SUITE_END();
