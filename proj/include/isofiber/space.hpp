#pragma once

#include <optional>
#include <string>
#include <utility>

#include "isofiber/expr.hpp"
#include "isofiber/quadrature.hpp"

namespace isofiber {

/// Total measure of the unit sphere S^{n-1} in R^n (2 pi^{n/2} / Gamma(n/2)).
double unit_sphere_area(int n);

/// A warped product of an interval with a fiber manifold, carrying radial
/// surface and volume densities. The fiber enters only through its total
/// measure, so everything downstream is one-dimensional.
struct SpaceSpec {
    int dim = 3;                    // n >= 2
    double lower = 0.0;             // A, may be -inf
    double upper = 0.0;             // B, may be +inf
    Expr warp;                      // g, positive on (A,B)
    Expr surface_density;           // Psi_S
    Expr volume_density;            // Psi_V
    double fiber_measure = 1.0;     // omega, total (n-1)-measure of the fiber
    double base_point = 0.0;        // a in (A,B)

    SpaceSpec() = default;
    SpaceSpec(int n, double a_end, double b_end, Expr g, Expr psi_s, Expr psi_v, double omega,
              double base);

    /// R^n minus the origin as (0,inf) x_r S^{n-1}, base point r = 1.
    static SpaceSpec euclidean_punctured(int n, Expr psi_s, Expr psi_v);

    bool is_euclidean_punctured_preset() const;
    bool has_simple_density() const;  // Psi_S == Psi_V structurally or on a grid

    /// Interval reflected about 0: (-B,-A) with all radial data composed with -r.
    SpaceSpec reflected() const;

    /// Integrand of volume without the fiber measure: Psi_V(r) g(r)^{n-1}.
    Expr volume_integrand() const;
    /// Fiber area without the fiber measure: Psi_S(r) g(r)^{n-1}.
    Expr area_integrand() const;
    /// Integrand of the horizontal-area obstruction: Psi_S(r) g(r)^{n-2}.
    Expr horizontal_integrand() const;
};

/// Weighted area of the vertical fiber {r} x L.
double fiber_area(const SpaceSpec& s, double r);

/// Signed weighted volume of the annulus between r0 and r1; endpoints may be
/// the interval ends (improper integrals handled by truncation sequences).
QuadResult annulus_volume(const SpaceSpec& s, double r0, double r1, QuadTol tol = {});

enum class Magnitude : std::uint8_t { finite, infinite, inconclusive };

struct Quantity {
    Magnitude kind = Magnitude::inconclusive;
    double value = 0.0;  // valid when finite
    double error = 0.0;

    bool finite() const { return kind == Magnitude::finite; }
    bool infinite() const { return kind == Magnitude::infinite; }
};

struct LimitValue {
    LimitKind kind = LimitKind::inconclusive;
    double value = 0.0;

    bool is_zero() const { return kind == LimitKind::zero; }
    bool is_positive() const { return kind == LimitKind::positive || kind == LimitKind::infinite; }
};

/// Numeric (in)finiteness evidence for the volume and fiber-area hypotheses.
/// Volumes are measured from the base point toward each end.
struct FinitenessReport {
    Quantity volume_at_lower;
    Quantity volume_at_upper;
    Quantity total_volume;
    LimitValue area_limit_lower;
    LimitValue area_limit_upper;
    Magnitude horizontal_integral_to_lower = Magnitude::inconclusive;
    Magnitude horizontal_integral_to_upper = Magnitude::inconclusive;
};

FinitenessReport classify_finiteness(const SpaceSpec& s, QuadTol tol = {});

/// Conformal reduction to simple density: returns the conformal factor
/// Psi_V/Psi_S and the simple density Psi_S^n / Psi_V^{n-1}.
std::pair<Expr, Expr> to_simple_density(const SpaceSpec& s);

const char* magnitude_name(Magnitude m);
const char* limit_kind_name(LimitKind k);

}  // namespace isofiber
