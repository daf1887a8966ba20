#include "isofiber/space.hpp"

#include <cmath>
#include <stdexcept>

namespace isofiber {

double unit_sphere_area(int n) {
    if (n < 2) throw std::invalid_argument("dimension must be >= 2");
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

namespace {

/// Samples r log-like across the interval for positivity / equality probes.
std::vector<double> probe_points(const SpaceSpec& s, int count) {
    std::vector<double> pts;
    pts.reserve(count);
    for (int k = -count / 2; k <= count / 2; ++k) {
        const double t = truncation_point(s.base_point, k < 0 ? s.lower : s.upper,
                                          std::min(std::abs(k), 40));
        if (t > s.lower && t < s.upper) pts.push_back(t);
    }
    pts.push_back(s.base_point);
    return pts;
}

void require_positive(const SpaceSpec& s, const Expr& e, const char* what) {
    for (double r : probe_points(s, 16)) {
        EvalResult v = e.try_eval(r);
        if (v.ok() && v.value <= 0.0)
            throw std::invalid_argument(std::string(what) + " is not strictly positive at r=" +
                                        std::to_string(r));
    }
}

}  // namespace

SpaceSpec::SpaceSpec(int n, double a_end, double b_end, Expr g, Expr psi_s, Expr psi_v,
                     double omega, double base)
    : dim(n),
      lower(a_end),
      upper(b_end),
      warp(std::move(g)),
      surface_density(std::move(psi_s)),
      volume_density(std::move(psi_v)),
      fiber_measure(omega),
      base_point(base) {
    if (n < 2) throw std::invalid_argument("dimension must be >= 2");
    if (!(lower < upper)) throw std::invalid_argument("interval is empty");
    if (!(base_point > lower && base_point < upper))
        throw std::invalid_argument("base point must lie inside the interval");
    if (!(fiber_measure > 0.0)) throw std::invalid_argument("fiber measure must be positive");
    require_positive(*this, warp, "warp factor");
    require_positive(*this, surface_density, "surface density");
    require_positive(*this, volume_density, "volume density");
}

SpaceSpec SpaceSpec::euclidean_punctured(int n, Expr psi_s, Expr psi_v) {
    return SpaceSpec(n, 0.0, std::numeric_limits<double>::infinity(), Expr::variable(),
                     std::move(psi_s), std::move(psi_v), unit_sphere_area(n), 1.0);
}

bool SpaceSpec::is_euclidean_punctured_preset() const {
    if (lower != 0.0 || !std::isinf(upper)) return false;
    if (std::abs(fiber_measure - unit_sphere_area(dim)) > 1e-9 * fiber_measure) return false;
    if (warp.kind() == Expr::Kind::variable) return true;
    for (double r : {0.3, 1.0, 2.7}) {
        EvalResult v = warp.try_eval(r);
        if (!v.ok() || std::abs(v.value - r) > 1e-12 * r) return false;
    }
    return true;
}

bool SpaceSpec::has_simple_density() const {
    if (surface_density.equals(volume_density)) return true;
    for (double r : probe_points(*this, 24)) {
        EvalResult a = surface_density.try_eval(r);
        EvalResult b = volume_density.try_eval(r);
        if (!a.ok() || !b.ok()) continue;
        if (std::abs(a.value - b.value) > 1e-12 * (std::abs(a.value) + std::abs(b.value)))
            return false;
    }
    return true;
}

SpaceSpec SpaceSpec::reflected() const {
    const Expr neg_r = -Expr::variable();
    SpaceSpec out = *this;
    out.lower = -upper;
    out.upper = -lower;
    out.base_point = -base_point;
    out.warp = warp.substitute(neg_r);
    out.surface_density = surface_density.substitute(neg_r);
    out.volume_density = volume_density.substitute(neg_r);
    return out;
}

Expr SpaceSpec::volume_integrand() const {
    return volume_density * pow(warp, Expr::constant(dim - 1));
}

Expr SpaceSpec::area_integrand() const {
    return surface_density * pow(warp, Expr::constant(dim - 1));
}

Expr SpaceSpec::horizontal_integrand() const {
    return surface_density * pow(warp, Expr::constant(dim - 2));
}

double fiber_area(const SpaceSpec& s, double r) {
    return s.fiber_measure * s.area_integrand().eval(r);
}

QuadResult annulus_volume(const SpaceSpec& s, double r0, double r1, QuadTol tol) {
    if (r0 == r1) return {0.0, 0.0, QuadStatus::converged};
    const CompiledExpr f = s.volume_integrand().compile();
    const bool swap = r0 > r1;
    if (swap) std::swap(r0, r1);
    const bool improper_lo = (r0 <= s.lower) || std::isinf(r0);
    const bool improper_hi = (r1 >= s.upper) || std::isinf(r1);

    QuadResult res;
    if (!improper_lo && !improper_hi) {
        res = integrate(f, r0, r1, tol);
    } else {
        // Split at an interior anchor and run truncation sequences outward.
        const double anchor = (!improper_lo) ? r0 : (!improper_hi ? r1 : s.base_point);
        QuadResult lo{0, 0, QuadStatus::converged}, hi{0, 0, QuadStatus::converged};
        if (improper_lo) {
            lo = integrate_to_endpoint(f, anchor, std::max(r0, s.lower), tol);
            lo.value = -lo.value;  // tail runs from the anchor downward
        } else if (r0 < anchor) {
            lo = integrate(f, r0, anchor, tol);
        }
        if (improper_hi)
            hi = integrate_to_endpoint(f, anchor, std::min(r1, s.upper), tol);
        else if (anchor < r1)
            hi = integrate(f, anchor, r1, tol);
        res.status = QuadStatus::converged;
        for (const QuadResult* part : {&lo, &hi}) {
            if (part->status == QuadStatus::divergent) res.status = QuadStatus::divergent;
            if (part->status == QuadStatus::inconclusive && res.status != QuadStatus::divergent)
                res.status = QuadStatus::inconclusive;
            if (part->status == QuadStatus::eval_error && res.status == QuadStatus::converged)
                res.status = QuadStatus::eval_error;
        }
        res.value = lo.value + hi.value;
        res.error = lo.error + hi.error;
    }
    res.value *= s.fiber_measure;
    res.error *= s.fiber_measure;
    if (swap) res.value = -res.value;
    return res;
}

namespace {

Quantity quantity_from(const QuadResult& q, double scale) {
    switch (q.status) {
        case QuadStatus::converged: return {Magnitude::finite, scale * q.value, scale * q.error};
        case QuadStatus::divergent: return {Magnitude::infinite, 0.0, 0.0};
        default: return {Magnitude::inconclusive, 0.0, 0.0};
    }
}

Magnitude magnitude_from(const QuadResult& q) {
    switch (q.status) {
        case QuadStatus::converged: return Magnitude::finite;
        case QuadStatus::divergent: return Magnitude::infinite;
        default: return Magnitude::inconclusive;
    }
}

}  // namespace

FinitenessReport classify_finiteness(const SpaceSpec& s, QuadTol tol) {
    FinitenessReport rep;
    const CompiledExpr vol = s.volume_integrand().compile();
    const CompiledExpr area = s.area_integrand().compile();
    const CompiledExpr horiz = s.horizontal_integrand().compile();
    const double a = s.base_point;

    rep.volume_at_lower = quantity_from(integrate_to_endpoint(vol, a, s.lower, tol),
                                        s.fiber_measure);
    rep.volume_at_lower.value = std::abs(rep.volume_at_lower.value);
    rep.volume_at_upper = quantity_from(integrate_to_endpoint(vol, a, s.upper, tol),
                                        s.fiber_measure);

    if (rep.volume_at_lower.infinite() || rep.volume_at_upper.infinite())
        rep.total_volume = {Magnitude::infinite, 0.0, 0.0};
    else if (rep.volume_at_lower.finite() && rep.volume_at_upper.finite())
        rep.total_volume = {Magnitude::finite,
                            rep.volume_at_lower.value + rep.volume_at_upper.value,
                            rep.volume_at_lower.error + rep.volume_at_upper.error};

    const double scale = area(a) * s.fiber_measure;
    auto scaled_area = [&](double r) { return area(r) * s.fiber_measure; };
    LimitEstimate lo = limit_at_endpoint(scaled_area, a, s.lower, scale);
    LimitEstimate hi = limit_at_endpoint(scaled_area, a, s.upper, scale);
    rep.area_limit_lower = {lo.kind, lo.value};
    rep.area_limit_upper = {hi.kind, hi.value};

    rep.horizontal_integral_to_lower = magnitude_from(integrate_to_endpoint(horiz, a, s.lower, tol));
    rep.horizontal_integral_to_upper = magnitude_from(integrate_to_endpoint(horiz, a, s.upper, tol));
    return rep;
}

std::pair<Expr, Expr> to_simple_density(const SpaceSpec& s) {
    if (s.surface_density.equals(s.volume_density))
        return {Expr::constant(1.0), s.surface_density};
    Expr factor = s.volume_density / s.surface_density;
    Expr simple = pow(s.surface_density, Expr::constant(s.dim)) /
                  pow(s.volume_density, Expr::constant(s.dim - 1));
    return {factor, simple};
}

const char* magnitude_name(Magnitude m) {
    switch (m) {
        case Magnitude::finite: return "finite";
        case Magnitude::infinite: return "infinite";
        case Magnitude::inconclusive: return "inconclusive";
    }
    return "?";
}

const char* limit_kind_name(LimitKind k) {
    switch (k) {
        case LimitKind::zero: return "zero";
        case LimitKind::positive: return "positive";
        case LimitKind::infinite: return "infinite";
        case LimitKind::inconclusive: return "inconclusive";
    }
    return "?";
}

}  // namespace isofiber
