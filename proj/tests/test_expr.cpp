#include <doctest.h>

#include <cmath>
#include <vector>

#include "isofiber/expr.hpp"
#include "isofiber/rng.hpp"

using namespace isofiber;

namespace {

double central_diff(const Expr& e, double r, double h) {
    return (e.eval(r + h) - e.eval(r - h)) / (2.0 * h);
}

/// Random tree generator used by the round-trip property. Stays inside the
/// grammar and uses the canonical builders, so folding matches the parser.
Expr random_tree(Rng& rng, int depth) {
    const int leaf_roll = int(rng.below(3));
    if (depth <= 0 || (depth < 3 && leaf_roll == 0)) {
        if (rng.below(2) == 0) return Expr::variable();
        const double mant = std::round(rng.uniform(-8.0, 8.0) * 4.0) / 4.0;
        return Expr::constant(mant);
    }
    switch (rng.below(8)) {
        case 0: return random_tree(rng, depth - 1) + random_tree(rng, depth - 1);
        case 1: return random_tree(rng, depth - 1) - random_tree(rng, depth - 1);
        case 2: return random_tree(rng, depth - 1) * random_tree(rng, depth - 1);
        case 3: return random_tree(rng, depth - 1) / random_tree(rng, depth - 1);
        case 4: return pow(random_tree(rng, depth - 1), random_tree(rng, depth - 2));
        case 5: return -random_tree(rng, depth - 1);
        case 6: return exp(random_tree(rng, depth - 2));
        default: return log(random_tree(rng, depth - 2));
    }
}

}  // namespace

TEST_SUITE_BEGIN("expr");

TEST_CASE("parse basic forms") {
    Expr e = Expr::parse("exp(r^2 - 2*r + 2)");
    CHECK(e.kind() == Expr::Kind::exp);
    Expr body = e.child(0);
    CHECK(body.kind() == Expr::Kind::add);           // (r^2 - 2r) + 2
    CHECK(body.child(0).kind() == Expr::Kind::sub);  // r^2 - 2r
    CHECK(body.child(0).child(0).kind() == Expr::Kind::pow);
    CHECK(body.child(0).child(1).kind() == Expr::Kind::mul);
    CHECK(e.eval(1.0) == doctest::Approx(M_E).epsilon(1e-14));

    Expr var = Expr::parse("r");
    CHECK(var.kind() == Expr::Kind::variable);

    CHECK(Expr::parse("r^-4").eval(2.0) == doctest::Approx(0.0625).epsilon(1e-15));
}

TEST_CASE("precedence") {
    // 2*r^2 is 2*(r^2), never (2r)^2.
    CHECK(Expr::parse("2*r^2").eval(3.0) == doctest::Approx(18.0));
    // ^ binds tighter than unary minus.
    CHECK(Expr::parse("-r^2").eval(3.0) == doctest::Approx(-9.0));
    // ^ is right associative.
    CHECK(Expr::parse("r^2^3").eval(2.0) == doctest::Approx(256.0));
    CHECK(Expr::parse("2*r+1").eval(4.0) == doctest::Approx(9.0));
    CHECK(Expr::parse("1 - 2 - 3").eval(1.0) == doctest::Approx(-4.0));
}

TEST_CASE("parse errors carry a position") {
    CHECK_THROWS_AS(Expr::parse(""), ParseError);
    CHECK_THROWS_AS(Expr::parse("   "), ParseError);
    CHECK_THROWS_AS(Expr::parse("r +"), ParseError);
    CHECK_THROWS_AS(Expr::parse("sin(r)"), ParseError);
    CHECK_THROWS_AS(Expr::parse("x + 1"), ParseError);
    CHECK_THROWS_AS(Expr::parse("(r"), ParseError);
    try {
        Expr::parse("1 + $");
    } catch (const ParseError& err) {
        CHECK(err.position == 4);
    }
}

TEST_CASE("eval edge cases") {
    CHECK(Expr::parse("exp(r^(-1))").eval(1.0) == doctest::Approx(M_E).epsilon(1e-14));
    CHECK(Expr::parse("r^(-4)").eval(10.0) == doctest::Approx(1e-4).epsilon(1e-14));
    CHECK(Expr::parse("exp(r^2-2*r+2)").eval(1.0) == doctest::Approx(M_E).epsilon(1e-14));

    CHECK(Expr::parse("log(r)").try_eval(-1.0).status == EvalStatus::domain_error);
    CHECK(Expr::parse("log(r - 5)").try_eval(1.0).status == EvalStatus::domain_error);
    CHECK(Expr::parse("1/(r - 2)").try_eval(2.0).status == EvalStatus::singularity);
    CHECK(Expr::parse("r^0.5").try_eval(-4.0).status == EvalStatus::domain_error);
    // Overflow is reported, not returned as infinity.
    CHECK(Expr::parse("exp(r^2)").try_eval(1e6).status == EvalStatus::overflow);
    CHECK_THROWS_AS(Expr::parse("exp(r^2)").eval(1e6), EvalError);
}

TEST_CASE("derivatives: symbolic rules") {
    // d/dr r^p = p r^(p-1)
    Expr d = Expr::parse("r^3.5").derivative();
    CHECK(d.eval(2.0) == doctest::Approx(3.5 * std::pow(2.0, 2.5)).epsilon(1e-14));

    // d/dr exp(r^2) at 1 is 2e; cross-check with the central difference oracle.
    Expr g = Expr::parse("exp(r^2)");
    const double sym = g.derivative().eval(1.0);
    CHECK(sym == doctest::Approx(2.0 * M_E).epsilon(1e-12));
    CHECK(sym == doctest::Approx(central_diff(g, 1.0, 1e-5)).epsilon(1e-6));

    CHECK(Expr::parse("7").derivative().is_constant(0.0));

    // General power rule with a variable exponent.
    Expr h = Expr::parse("r^r");
    const double expect = std::pow(2.0, 2.0) * (std::log(2.0) + 1.0);
    CHECK(h.derivative().eval(2.0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("derived expression agrees with finite differences") {
    const std::vector<std::string> family = {
        "r^(-4)", "r^(-3)", "exp(r^2)", "exp(r^2 - 2*r + 2)", "exp(r^(-1))",
        "r^(-2)*exp(-r)", "log(r) + r^2", "exp(r)/r", "r^1.5",
    };
    Rng rng(2024);
    for (const auto& text : family) {
        DerivedExpr d = DerivedExpr::of(Expr::parse(text));
        for (int k = 0; k < 100; ++k) {
            const double r = rng.uniform(0.3, 2.8);
            const double h = 1e-5 * std::max(1.0, r);
            const double fd1 = central_diff(d.value, r, h);
            const double fd2 = (d.value.eval(r + h) - 2.0 * d.value.eval(r) + d.value.eval(r - h)) /
                               (h * h);
            CHECK(d.first.eval(r) ==
                  doctest::Approx(fd1).epsilon(1e-6).scale(std::abs(fd1) + 1.0));
            CHECK(d.second.eval(r) ==
                  doctest::Approx(fd2).epsilon(5e-5).scale(std::abs(fd2) + 1.0));
        }
    }
}

TEST_CASE("print/parse round trip on random trees") {
    Rng rng(77);
    int checked = 0;
    for (int k = 0; k < 400; ++k) {
        Expr t = random_tree(rng, int(rng.below(8)) + 1);
        Expr back = Expr::parse(t.str());
        CHECK(back.equals(t));
        ++checked;
    }
    CHECK(checked == 400);
}

TEST_CASE("substitute") {
    Expr e = Expr::parse("r^2 + exp(r)");
    Expr sub = e.substitute(-Expr::variable());
    CHECK(sub.eval(2.0) == doctest::Approx(4.0 + std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("compiled evaluation matches tree evaluation") {
    Rng rng(5150);
    for (int k = 0; k < 60; ++k) {
        Expr t = random_tree(rng, 5);
        CompiledExpr c = t.compile();
        for (int j = 0; j < 20; ++j) {
            const double r = rng.uniform(0.1, 4.0);
            EvalResult a = t.try_eval(r);
            EvalResult b = c.try_eval(r);
            CHECK(a.ok() == b.ok());
            if (a.ok() && b.ok())
                CHECK(a.value == doctest::Approx(b.value).epsilon(1e-13).scale(std::abs(a.value) + 1.0));
        }
    }
}

TEST_SUITE_END();
