#include "isofiber/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace isofiber {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void finite_difference_derivatives(const std::vector<double>& x, const std::vector<double>& f,
                                   std::vector<double>& fp, std::vector<double>& fpp) {
    const std::size_t n = x.size();
    fp.assign(n, kNaN);
    fpp.assign(n, kNaN);
    if (n < 3) return;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hm = x[i] - x[i - 1];
        const double hp = x[i + 1] - x[i];
        const double slm = (f[i] - f[i - 1]) / hm;
        const double slp = (f[i + 1] - f[i]) / hp;
        fp[i] = (hm * slp + hp * slm) / (hm + hp);
        fpp[i] = 2.0 * (slp - slm) / (hm + hp);
    }
}

std::string csv_token(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

const char* tristate_name(TriState t) {
    switch (t) {
        case TriState::yes: return "yes";
        case TriState::no: return "no";
        case TriState::inconclusive: return "inconclusive";
    }
    return "?";
}

std::size_t ProfileCurve::index_nearest_v(double v_query) const {
    const auto it = std::lower_bound(v.begin(), v.end(), v_query);
    if (it == v.begin()) return 0;
    if (it == v.end()) return v.size() - 1;
    const std::size_t hi = it - v.begin();
    return (v_query - v[hi - 1] <= v[hi] - v_query) ? hi - 1 : hi;
}

std::size_t ProfileCurve::index_nearest_r(double r_query) const {
    const auto it = std::lower_bound(r.begin(), r.end(), r_query);
    if (it == r.begin()) return 0;
    if (it == r.end()) return r.size() - 1;
    const std::size_t hi = it - r.begin();
    return (r_query - r[hi - 1] <= r[hi] - r_query) ? hi - 1 : hi;
}

void ProfileCurve::write_csv(std::ostream& out) const {
    out << "V,F,Fp,Fpp\n";
    for (std::size_t i = 0; i < size(); ++i)
        out << csv_token(v[i]) << ',' << csv_token(f[i]) << ',' << csv_token(fp[i]) << ','
            << csv_token(fpp[i]) << '\n';
}

ProfileCurve build_profile(const SpaceSpec& s, const GridSpec& grid, QuadTol tol) {
    ModelSpace model = reduce(s, grid, tol);
    const auto& radii = model.grid_r();
    const auto& svals = model.grid_s();

    ProfileCurve p;
    p.dim = s.dim;
    p.omega = s.fiber_measure;
    p.base_point = s.base_point;
    p.simple_density = s.has_simple_density();
    p.preset = s.is_euclidean_punctured_preset();
    p.samples_per_octave = grid.per_octave;

    const CompiledExpr area = s.area_integrand().compile();
    p.r = radii;
    p.v.resize(radii.size());
    p.f.resize(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        p.v[i] = s.fiber_measure * svals[i];
        p.f[i] = s.fiber_measure * area(radii[i]);
    }
    p.dv.resize(model.grid_panels().size());
    for (std::size_t i = 0; i < p.dv.size(); ++i)
        p.dv[i] = s.fiber_measure * model.grid_panels()[i];
    finite_difference_derivatives(p.v, p.f, p.fp, p.fpp);

    const CompiledExpr vol_c = s.volume_integrand().compile();
    auto tail = [&](double from, double end) -> Quantity {
        QuadResult q = integrate_to_endpoint(vol_c, from, end, tol);
        switch (q.status) {
            case QuadStatus::converged:
                return {Magnitude::finite, std::abs(q.value) * s.fiber_measure,
                        q.error * s.fiber_measure};
            case QuadStatus::divergent: return {Magnitude::infinite, 0.0, 0.0};
            default: return {Magnitude::inconclusive, 0.0, 0.0};
        }
    };
    p.tail_volume_lower = tail(radii.front(), s.lower);
    p.tail_volume_upper = tail(radii.back(), s.upper);

    // Symbolic derivative route: F' = (d/dr area)/(d/dr volume) in r, then one
    // more derivative for F''. The fiber measure cancels in F' and shows up
    // once in F''.
    const Expr area_nd = s.area_integrand();
    const Expr vol_nd = s.volume_integrand();
    const Expr fp_expr = area_nd.derivative() / vol_nd;
    const Expr fpp_expr = fp_expr.derivative() / vol_nd;
    const Expr log_area_d2_expr = log(area_nd).derivative().derivative();
    const CompiledExpr fp_c = fp_expr.compile();
    const CompiledExpr fpp_c = fpp_expr.compile();
    const CompiledExpr log_d2_c = log_area_d2_expr.compile();
    p.fp_cf.resize(radii.size(), kNaN);
    p.fpp_cf.resize(radii.size(), kNaN);
    p.log_area_d2.resize(radii.size(), kNaN);
    std::size_t ok_count = 0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        EvalResult a = fp_c.try_eval(radii[i]);
        EvalResult b = fpp_c.try_eval(radii[i]);
        EvalResult c = log_d2_c.try_eval(radii[i]);
        if (a.ok()) p.fp_cf[i] = a.value;
        if (b.ok()) p.fpp_cf[i] = b.value / s.fiber_measure;
        if (c.ok()) p.log_area_d2[i] = c.value;
        if (a.ok() && b.ok() && c.ok()) ++ok_count;
    }
    p.closed_form_valid = ok_count * 10 >= radii.size() * 9;
    p.partial = false;  // set below from quadrature health

    // A model table that stopped short of its budget on eval errors marks the
    // curve partial; value-cap truncation is expected behaviour near blow-up.
    for (std::size_t i = 0; i + 1 < svals.size(); ++i) {
        if (!std::isfinite(svals[i]) || !std::isfinite(p.f[i])) {
            p.partial = true;
            break;
        }
    }
    return p;
}

OrientedCurve orient(const ProfileCurve& p, Orientation o) {
    OrientedCurve out;
    out.orientation = o;
    const std::size_t n = p.size();
    out.x.resize(n);
    out.f.resize(n);
    out.r.resize(n);
    switch (o) {
        case Orientation::signed_from_base:
            out.x = p.v;
            out.f = p.f;
            out.r = p.r;
            break;
        case Orientation::from_lower: {
            // x = volume of (A, r]: the edge tail plus exact panel sums, so
            // small volumes keep full relative accuracy.
            if (!p.tail_volume_lower.finite())
                throw std::logic_error("volume at the lower end is not finite");
            double acc = p.tail_volume_lower.value;
            for (std::size_t i = 0; i < n; ++i) {
                out.x[i] = acc;
                out.f[i] = p.f[i];
                out.r[i] = p.r[i];
                if (i + 1 < n) acc += p.dv[i];
            }
            break;
        }
        case Orientation::from_upper: {
            if (!p.tail_volume_upper.finite())
                throw std::logic_error("volume at the upper end is not finite");
            double acc = p.tail_volume_upper.value;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t j = n - 1 - i;
                out.x[i] = acc;
                out.f[i] = p.f[j];
                out.r[i] = p.r[j];
                if (j > 0) acc += p.dv[j - 1];
            }
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Convexity

namespace {

struct ConvexityScan {
    std::vector<std::size_t> violation_index;  // indices into the interior range
    std::vector<ConvexityViolation> violations;
    std::vector<bool> ignorable;  // isolated and within 10x tolerance
    std::size_t n = 0;
};

ConvexityScan scan_convexity(const std::vector<double>& x, const std::vector<double>& f) {
    ConvexityScan out;
    const std::size_t n = x.size();
    out.n = n;
    if (n < 3) return out;
    std::vector<double> slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) slope[i] = (f[i + 1] - f[i]) / (x[i + 1] - x[i]);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    std::vector<char> is_violation(n, 0);
    std::vector<double> excess(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double delta = slope[i] - slope[i - 1];
        const double inv_h = 1.0 / (x[i] - x[i - 1]) + 1.0 / (x[i + 1] - x[i]);
        // Rounding of the ordinates and quantization of the abscissae both
        // feed into the slope differences.
        const double slope_mag = std::max(std::abs(slope[i]), std::abs(slope[i - 1]));
        const double fd_noise =
            32.0 * eps * (std::abs(f[i - 1]) + std::abs(f[i]) + std::abs(f[i + 1])) * inv_h +
            32.0 * eps * slope_mag * std::abs(x[i]) * inv_h;
        const double tol = 1e-7 * slope_mag + fd_noise;
        if (delta < -tol) {
            is_violation[i] = 1;
            excess[i] = -delta / std::max(tol, 1e-300);
            out.violation_index.push_back(i);
            out.violations.push_back({x[i], 2.0 * delta / (x[i + 1] - x[i - 1])});
        }
    }
    out.ignorable.resize(out.violation_index.size());
    for (std::size_t k = 0; k < out.violation_index.size(); ++k) {
        const std::size_t i = out.violation_index[k];
        const bool isolated = !(i > 0 && is_violation[i - 1]) && !(i + 1 < n && is_violation[i + 1]);
        out.ignorable[k] = isolated && excess[i] <= 10.0;
    }
    return out;
}

}  // namespace

ConvexityVerdict check_convexity(const std::vector<double>& x, const std::vector<double>& f) {
    ConvexityVerdict verdict;
    if (x.size() < 5) return verdict;
    ConvexityScan scan = scan_convexity(x, f);
    verdict.violations = scan.violations;
    verdict.convex_everywhere = scan.violations.empty() ? TriState::yes : TriState::no;

    std::size_t last_real = 0;
    bool any_real = false;
    for (std::size_t k = 0; k < scan.violation_index.size(); ++k) {
        if (!scan.ignorable[k]) {
            last_real = scan.violation_index[k];
            any_real = true;
        }
    }
    if (!any_real)
        verdict.eventually_convex_from = x.front();
    else if (last_real + 2 < x.size())
        verdict.eventually_convex_from = x[last_real + 1];
    return verdict;
}

ConvexityVerdict check_convexity(const ProfileCurve& p) {
    ConvexityVerdict verdict = check_convexity(p.v, p.f);

    // Log-convexity of the fiber area in r, from the samples.
    std::vector<double> logs;
    std::vector<double> rr;
    logs.reserve(p.size());
    rr.reserve(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.f[i] > 0.0 && std::isfinite(p.f[i])) {
            rr.push_back(p.r[i]);
            logs.push_back(std::log(p.f[i]));
        }
    }
    if (rr.size() >= 5) {
        ConvexityScan scan = scan_convexity(rr, logs);
        verdict.log_convex_in_r = scan.violations.empty() ? TriState::yes : TriState::no;
    }

    // Symbolic margin (log fiber area)'' when available.
    if (p.closed_form_valid) {
        double margin = std::numeric_limits<double>::infinity();
        std::optional<double> from_r;
        double last_bad = -std::numeric_limits<double>::infinity();
        bool any = false;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double m = p.log_area_d2[i];
            if (std::isnan(m)) continue;
            any = true;
            margin = std::min(margin, m);
            if (m < -1e-9 * std::max(1.0, std::abs(m))) last_bad = p.r[i];
        }
        if (any) {
            verdict.closed_form_available = true;
            verdict.closed_form_min_margin = margin;
            if (last_bad == -std::numeric_limits<double>::infinity())
                from_r = p.r.front();
            else {
                for (std::size_t i = 0; i < p.size(); ++i)
                    if (p.r[i] > last_bad) {
                        from_r = p.r[i];
                        break;
                    }
            }
            verdict.closed_form_convex_from_r = from_r;
        }
    }
    return verdict;
}

// ---------------------------------------------------------------------------
// Lower convex envelope (monotone chain on the sample set).

namespace {

double cross(const EnvelopePoint& o, const EnvelopePoint& a, const EnvelopePoint& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

EnvelopeResult lower_convex_envelope(const std::vector<double>& x, const std::vector<double>& y,
                                     bool anchor_at_zero, double touch_rel_tol) {
    if (x.size() != y.size() || x.empty()) throw std::invalid_argument("bad sample arrays");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw std::invalid_argument("abscissae must be increasing");

    std::vector<EnvelopePoint> pts;
    pts.reserve(x.size() + 1);
    if (anchor_at_zero) {
        if (x.front() <= 0.0) throw std::invalid_argument("anchored envelope requires x > 0");
        pts.push_back({0.0, 0.0});
    }
    for (std::size_t i = 0; i < x.size(); ++i) pts.push_back({x[i], y[i]});

    std::vector<EnvelopePoint> hull;
    hull.reserve(pts.size());
    for (const EnvelopePoint& p : pts) {
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull[hull.size() - 1], p) <= 0.0)
            hull.pop_back();
        hull.push_back(p);
    }

    EnvelopeResult out;
    out.anchored = anchor_at_zero;
    out.vertices = std::move(hull);
    out.value.assign(x.size(), 0.0);
    out.touch.assign(x.size(), false);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        while (seg + 2 < out.vertices.size() && out.vertices[seg + 1].x <= x[i]) ++seg;
        const EnvelopePoint& a = out.vertices[seg];
        const EnvelopePoint& b = out.vertices[seg + 1 < out.vertices.size() ? seg + 1 : seg];
        double val;
        if (x[i] == a.x)
            val = a.y;
        else if (x[i] == b.x || a.x == b.x)
            val = b.y;
        else
            val = a.y + (b.y - a.y) * (x[i] - a.x) / (b.x - a.x);
        out.value[i] = val;
        const double scale = std::max(std::abs(y[i]), 1e-300);
        out.touch[i] = std::abs(y[i] - val) <= touch_rel_tol * scale;
    }
    return out;
}

bool EnvelopeResult::below_or_on(const std::vector<double>& x, const std::vector<double>& y,
                                 std::size_t i) const {
    const EnvelopePoint p{x[i], y[i]};
    // Find the hull segment spanning p.x and test the same orientation
    // predicate the construction used.
    for (std::size_t s = 0; s + 1 < vertices.size(); ++s) {
        if (vertices[s].x <= p.x && p.x <= vertices[s + 1].x) {
            if (vertices[s].x == p.x) return p.y >= vertices[s].y;
            if (vertices[s + 1].x == p.x) return p.y >= vertices[s + 1].y;
            return cross(vertices[s], p, vertices[s + 1]) <= 0.0;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Certificates

namespace {

struct ContactSet {
    std::vector<bool> valid;  // per sample: touching and not an isolated edge artifact
};

/// A touch at the very first or last sample certifies nothing by itself: a
/// hull always passes through the extreme points, so an isolated edge touch is
/// a window artifact rather than evidence of tangency.
ContactSet valid_contacts(const EnvelopeResult& env) {
    ContactSet cs;
    const std::size_t n = env.touch.size();
    cs.valid.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (!env.touch[i]) continue;
        if (i == 0 && !(n > 1 && env.touch[1])) continue;
        if (i == n - 1 && !(n > 1 && env.touch[n - 2])) continue;
        cs.valid[i] = true;
    }
    return cs;
}

std::pair<double, double> contact_range(const OrientedCurve& c, const ContactSet& cs,
                                        std::size_t around) {
    std::size_t lo = around, hi = around;
    while (lo > 0 && cs.valid[lo - 1]) --lo;
    while (hi + 1 < cs.valid.size() && cs.valid[hi + 1]) ++hi;
    return {c.x[lo], c.x[hi]};
}

}  // namespace

namespace {

struct MinorantSetup {
    bool ok = false;
    bool inconclusive = false;
    std::string reason;
    bool two_sided = false;
    OrientedCurve curve;
    EnvelopeResult envelope;
    ContactSet contacts;
};

MinorantSetup minorant_setup(const ProfileCurve& p, const FinitenessReport& fin,
                             double touch_rel_tol) {
    MinorantSetup setup;
    const bool lo_fin = fin.volume_at_lower.finite();
    const bool hi_fin = fin.volume_at_upper.finite();
    const bool lo_inf = fin.volume_at_lower.infinite();
    const bool hi_inf = fin.volume_at_upper.infinite();
    if (!(lo_fin || lo_inf) || !(hi_fin || hi_inf)) {
        setup.inconclusive = true;
        setup.reason = "volume finiteness at an interval end is inconclusive";
        return setup;
    }
    if (lo_fin && hi_fin) {
        setup.reason = "total volume is finite; single-fiber minorant cases need infinite volume";
        return setup;
    }
    setup.two_sided = lo_inf && hi_inf;
    const Orientation o = setup.two_sided
                              ? Orientation::signed_from_base
                              : (lo_fin ? Orientation::from_lower : Orientation::from_upper);
    setup.curve = orient(p, o);
    setup.envelope = lower_convex_envelope(setup.curve.x, setup.curve.f,
                                           /*anchor_at_zero=*/!setup.two_sided, touch_rel_tol);
    if (setup.two_sided) {
        // The minorant must keep positive limits at both (infinite-volume)
        // ends; test the envelope's end extensions and the fiber-area limits.
        if (!fin.area_limit_lower.is_positive() || !fin.area_limit_upper.is_positive()) {
            setup.inconclusive = fin.area_limit_lower.kind == LimitKind::inconclusive ||
                                 fin.area_limit_upper.kind == LimitKind::inconclusive;
            setup.reason = "fiber area limit at an end is not positive";
            return setup;
        }
        const auto& v = setup.envelope.vertices;
        if (v.size() >= 2) {
            const double slope_first = (v[1].y - v[0].y) / (v[1].x - v[0].x);
            const double slope_last = (v[v.size() - 1].y - v[v.size() - 2].y) /
                                      (v[v.size() - 1].x - v[v.size() - 2].x);
            if (slope_first > 0.0 || slope_last < 0.0) {
                setup.reason = "envelope extension has a non-positive limit at an end";
                return setup;
            }
        }
    }
    setup.contacts = valid_contacts(setup.envelope);
    setup.ok = true;
    return setup;
}

}  // namespace

CertifyResult certify_fiber(const ProfileCurve& p, const FinitenessReport& fin, double v0,
                            double touch_rel_tol) {
    CertifyResult out;
    MinorantSetup setup = minorant_setup(p, fin, touch_rel_tol);
    if (!setup.ok) {
        out.status = setup.inconclusive ? CertifyResult::Status::inconclusive
                                        : CertifyResult::Status::refused;
        out.reason = setup.reason;
        return out;
    }
    const OrientedCurve& c = setup.curve;
    const EnvelopeResult& env = setup.envelope;

    if (v0 < c.x.front() || v0 > c.x.back()) {
        out.status = CertifyResult::Status::refused;
        out.reason = "queried volume lies outside the sampled window";
        return out;
    }
    std::size_t i = std::lower_bound(c.x.begin(), c.x.end(), v0) - c.x.begin();
    if (i > 0 && (i == c.x.size() || v0 - c.x[i - 1] <= c.x[i] - v0)) --i;
    out.gap = c.f[i] - env.value[i];

    if (!setup.contacts.valid[i]) {
        out.status = CertifyResult::Status::refused;
        out.reason = env.touch[i] ? "contact only at the window edge (extend the grid)"
                                  : "envelope lies strictly below the curve at this volume";
        return out;
    }

    MinorantCertificate cert;
    cert.kind = setup.two_sided ? MinorantCertificate::Kind::two_sided
                                : MinorantCertificate::Kind::anchored;
    cert.orientation = c.orientation;
    cert.v0 = c.x[i];
    cert.r0 = c.r[i];
    cert.gap = out.gap;
    std::tie(cert.contact_lo, cert.contact_hi) = contact_range(c, setup.contacts, i);
    cert.witness = env.vertices;
    out.status = CertifyResult::Status::certified;
    out.certificate = std::move(cert);
    return out;
}

ContactSummary summarize_contacts(const ProfileCurve& p, const FinitenessReport& fin,
                                  double touch_rel_tol) {
    ContactSummary out;
    MinorantSetup setup = minorant_setup(p, fin, touch_rel_tol);
    if (!setup.ok) {
        out.inconclusive = setup.inconclusive;
        out.reason = setup.reason;
        return out;
    }
    out.applicable = true;
    out.orientation = setup.curve.orientation;
    const auto& valid = setup.contacts.valid;
    for (std::size_t i = 0; i < valid.size();) {
        if (!valid[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < valid.size() && valid[j + 1]) ++j;
        out.volume_ranges.emplace_back(setup.curve.x[i], setup.curve.x[j]);
        const double r_a = setup.curve.r[i], r_b = setup.curve.r[j];
        out.radius_ranges.emplace_back(std::min(r_a, r_b), std::max(r_a, r_b));
        i = j + 1;
    }
    return out;
}

CertifyResult certify_large_fibers(const ProfileCurve& p, const FinitenessReport& fin) {
    CertifyResult out;
    auto fail = [&](const char* name, const std::string& why,
                    CertifyResult::Status st = CertifyResult::Status::refused) {
        out.conditions.push_back({name, TriState::no, why});
        out.status = st;
        out.reason = why;
        return out;
    };
    auto pass = [&](const char* name, const std::string& evidence) {
        out.conditions.push_back({name, TriState::yes, evidence});
    };

    if (fin.total_volume.kind == Magnitude::inconclusive ||
        (!fin.volume_at_lower.finite() && !fin.volume_at_lower.infinite()) ||
        (!fin.volume_at_upper.finite() && !fin.volume_at_upper.infinite())) {
        out.conditions.push_back({"volume finiteness", TriState::inconclusive, ""});
        out.status = CertifyResult::Status::inconclusive;
        out.reason = "volume finiteness is inconclusive";
        return out;
    }
    if (!fin.total_volume.infinite()) return fail("infinite total volume", "total volume is finite");
    const bool lo_fin = fin.volume_at_lower.finite();
    const bool hi_fin = fin.volume_at_upper.finite();
    if (lo_fin == hi_fin)
        return fail("finite volume at one end", "needs finite volume at exactly one end");
    pass("infinite total volume", "");
    pass("finite volume at one end", lo_fin ? "lower" : "upper");

    OrientedCurve c = orient(p, lo_fin ? Orientation::from_lower : Orientation::from_upper);
    const std::size_t n = c.x.size();
    if (n < 8) return fail("window size", "window too small");

    ConvexityVerdict conv = check_convexity(c.x, c.f);
    if (!conv.eventually_convex_from)
        return fail("eventual convexity", "curve is not eventually convex on the sampled window");
    const double x_conv = *conv.eventually_convex_from;
    std::size_t k_conv = std::lower_bound(c.x.begin(), c.x.end(), x_conv) - c.x.begin();
    k_conv = std::min(k_conv, n - 2);
    pass("eventual convexity", "from volume " + std::to_string(x_conv));

    // Positive-slope chord through the origin below the curve: the infimum of
    // F/V over the grid must be attained in the interior.
    std::size_t argmin = 0;
    double ratio_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(c.x[i] > 0.0)) continue;
        const double q = c.f[i] / c.x[i];
        if (q < ratio_min) {
            ratio_min = q;
            argmin = i;
        }
    }
    if (argmin >= n - 1)
        return fail("positive-slope chord through the origin",
                    "F/V is still decreasing at the window end; no positive-slope line "
                    "through the origin stays below the curve");
    if (argmin == 0)
        return fail("positive-slope chord through the origin",
                    "F/V is minimized at the window start; vertical asymptote at volume 0 "
                    "is not visible");
    const double sigma = ratio_min;
    pass("positive-slope chord through the origin", "slope " + std::to_string(sigma));

    // Derivative growth: slopes over the convex tail must double at least
    // once and still be climbing at the window end.
    std::vector<double> slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) slope[i] = (c.f[i + 1] - c.f[i]) / (c.x[i + 1] - c.x[i]);
    double slope_min_tail = std::numeric_limits<double>::infinity();
    for (std::size_t i = k_conv; i + 1 < n; ++i) slope_min_tail = std::min(slope_min_tail, slope[i]);
    const double s_end = slope[n - 2];
    const std::size_t probe = n >= 6 ? n - 5 : k_conv;
    const bool still_climbing = s_end >= slope[probe] * (1.0 - 1e-9);
    if (!(s_end > 0.0) || !(s_end >= 2.0 * std::max(slope_min_tail, 0.0)) || !still_climbing)
        return fail("derivative doubling",
                    "derivative does not double along the grid (F' appears bounded)");
    pass("derivative doubling",
         "tail slope grows from " + std::to_string(slope_min_tail) + " to " +
             std::to_string(s_end));

    // Tangent line with nonnegative V-intercept, a global minorant on the grid.
    for (std::size_t k = std::max<std::size_t>(k_conv, 1); k + 1 < n; ++k) {
        const double hm = c.x[k] - c.x[k - 1], hp = c.x[k + 1] - c.x[k];
        const double m = (hm * slope[k] + hp * slope[k - 1]) / (hm + hp);
        if (!(m > sigma)) continue;
        if (c.x[k] - c.f[k] / m < -1e-12 * c.x[k]) continue;  // negative intercept
        bool below = true;
        for (std::size_t i = 0; i < n && below; ++i) {
            const double l = c.f[k] + m * (c.x[i] - c.x[k]);
            if (l > c.f[i] + 1e-9 * std::abs(c.f[i])) below = false;
        }
        if (!below) continue;

        const double x_meet = (c.f[k] - m * c.x[k]) / (sigma - m);  // chord meets tangent
        MinorantCertificate cert;
        cert.kind = MinorantCertificate::Kind::threshold;
        cert.orientation = c.orientation;
        cert.witness = {{0.0, 0.0},
                        {x_meet, sigma * x_meet},
                        {c.x[k], c.f[k]}};
        // Smallest grid volume where the assembled minorant meets the curve.
        std::size_t first_touch = k;
        for (std::size_t i = 0; i <= k; ++i) {
            const double mv = c.x[i] <= x_meet ? sigma * c.x[i] : c.f[k] + m * (c.x[i] - c.x[k]);
            if (std::abs(c.f[i] - mv) <= 1e-6 * std::max(std::abs(c.f[i]), 1e-300)) {
                first_touch = i;
                break;
            }
        }
        cert.v0 = c.x[first_touch];
        cert.r0 = c.r[first_touch];
        cert.gap = 0.0;
        cert.contact_lo = c.x[first_touch];
        cert.contact_hi = c.x[n - 1];
        pass("tangent line with nonnegative intercept",
             "tangency at volume " + std::to_string(c.x[k]));
        out.status = CertifyResult::Status::certified;
        out.certificate = std::move(cert);
        return out;
    }
    return fail("tangent line with nonnegative intercept",
                "no tangent line with nonnegative intercept stays below the curve");
}

}  // namespace isofiber
