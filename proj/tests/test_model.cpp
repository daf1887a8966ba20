#include <doctest.h>

#include <cmath>

#include "isofiber/model.hpp"
#include "isofiber/rng.hpp"

using namespace isofiber;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_SUITE_BEGIN("model");

TEST_CASE("closed-form reduction: plane volume coordinate") {
    // n=2, g=r, Psi_V=1 on (0,inf), base 1: s(r) = (r^2-1)/2, Psi(s) = sqrt(2s+1).
    SpaceSpec s(2, 0.0, kInf, Expr::parse("r"), Expr::parse("1"), Expr::parse("1"), 2.0 * M_PI,
                1.0);
    ModelSpace m = reduce(s);
    for (double r : {0.25, 0.5, 1.0, 2.0, 5.0}) {
        CHECK(m.forward(r) == doctest::Approx((r * r - 1.0) / 2.0).epsilon(1e-12));
    }
    for (double sv : {-0.4, 0.0, 1.5, 7.0}) {
        CHECK(m.inverse(sv) == doctest::Approx(std::sqrt(2.0 * sv + 1.0)).epsilon(1e-12));
        CHECK(m.surface_density(sv) == doctest::Approx(std::sqrt(2.0 * sv + 1.0)).epsilon(1e-10));
    }
    CHECK(m.endpoint_lower.kind == Magnitude::finite);
    CHECK(m.endpoint_lower.value == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(m.endpoint_upper.kind == Magnitude::infinite);
}

TEST_CASE("identity reduction") {
    SpaceSpec s(2, -1.0, 1.0, Expr::parse("1"), Expr::parse("2 + r"), Expr::parse("1"), 1.0, 0.0);
    ModelSpace m = reduce(s);
    for (double r : {-0.9, -0.3, 0.0, 0.4, 0.95}) {
        CHECK(m.forward(r) == doctest::Approx(r).epsilon(1e-12));
        CHECK(m.surface_density_at_r(r) == doctest::Approx(2.0 + r).epsilon(1e-13));
    }
    CHECK(m.endpoint_lower.kind == Magnitude::finite);
    CHECK(m.endpoint_lower.value == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(m.endpoint_upper.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("forward map is strictly increasing") {
    SpaceSpec s = SpaceSpec::euclidean_punctured(3, Expr::parse("exp(r^(-1))"),
                                                 Expr::parse("exp(r^(-1))"));
    ModelSpace m = reduce(s);
    const auto& sv = m.grid_s();
    for (std::size_t i = 1; i < sv.size(); ++i) CHECK(sv[i] > sv[i - 1]);
    Rng rng(4);
    for (int k = 0; k < 50; ++k) {
        double a = rng.uniform(m.window_lower_r(), m.window_upper_r());
        double b = rng.uniform(m.window_lower_r(), m.window_upper_r());
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        CHECK(m.forward(a) < m.forward(b));
    }
}

TEST_CASE("round trip r -> s -> r") {
    SpaceSpec s = SpaceSpec::euclidean_punctured(3, Expr::parse("exp(r^2)"), Expr::parse("exp(r^2)"));
    ModelSpace m = reduce(s);
    Rng rng(11);
    for (int k = 0; k < 60; ++k) {
        const double r = rng.uniform(0.05, 4.0);
        const double back = m.inverse(m.forward(r));
        CHECK(back == doctest::Approx(r).epsilon(1e-8));
    }
}

TEST_CASE("preservation spot checks") {
    SpaceSpec p4 = SpaceSpec::euclidean_punctured(3, Expr::parse("r^-4"), Expr::parse("r^-4"));
    ModelSpace m = reduce(p4);
    // Volume of the annulus (1,2) both ways: 4*pi*(1 - 1/2) = 2*pi.
    const double direct = annulus_volume(p4, 1.0, 2.0).value;
    const double mapped = m.fiber_measure() * (m.forward(2.0) - m.forward(1.0));
    CHECK(direct == doctest::Approx(2.0 * M_PI).epsilon(1e-10));
    CHECK(mapped == doctest::Approx(2.0 * M_PI).epsilon(1e-10));

    PreservationReport rep = verify_preservation(p4, m, 100, 7);
    CHECK(rep.max_rel_error() < 1e-8);

    SpaceSpec unit = SpaceSpec::euclidean_punctured(3, Expr::parse("1"), Expr::parse("1"));
    PreservationReport rep2 = verify_preservation(unit, reduce(unit), 100, 7);
    CHECK(rep2.max_rel_error() < 1e-8);
}

TEST_CASE("degenerate annulus") {
    SpaceSpec unit = SpaceSpec::euclidean_punctured(3, Expr::parse("1"), Expr::parse("1"));
    ModelSpace m = reduce(unit);
    CHECK(m.fiber_measure() * (m.forward(1.5) - m.forward(1.5)) == 0.0);
}

TEST_CASE("convexity transfers between Psi(s) and the profile") {
    // Psi(s) convex in s iff fiber area is convex in annulus volume; compare
    // verdict signs on a shared grid for a convex and a concave example.
    for (const char* density : {"r^-4", "1"}) {
        SpaceSpec s = SpaceSpec::euclidean_punctured(3, Expr::parse(density), Expr::parse(density));
        ModelSpace m = reduce(s);
        const auto& r = m.grid_r();
        const auto& sv = m.grid_s();
        std::vector<double> psi(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) psi[i] = m.surface_density_at_r(r[i]);
        // Second differences of Psi over s and of (omega Psi) over (omega s)
        // have identical signs.
        int bad = 0;
        for (std::size_t i = 1; i + 1 < r.size(); ++i) {
            const double d_psi = (psi[i + 1] - psi[i]) / (sv[i + 1] - sv[i]) -
                                 (psi[i] - psi[i - 1]) / (sv[i] - sv[i - 1]);
            const double d_fib = (m.fiber_measure() * psi[i + 1] - m.fiber_measure() * psi[i]) /
                                     (m.fiber_measure() * (sv[i + 1] - sv[i])) -
                                 (m.fiber_measure() * psi[i] - m.fiber_measure() * psi[i - 1]) /
                                     (m.fiber_measure() * (sv[i] - sv[i - 1]));
            if ((d_psi > 0) != (d_fib > 0) && std::abs(d_psi) > 1e-12) ++bad;
        }
        CHECK(bad == 0);
    }
}

TEST_SUITE_END();
