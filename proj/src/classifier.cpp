#include "isofiber/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace isofiber {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string describe(const Quantity& q) {
    switch (q.kind) {
        case Magnitude::finite: return "finite(" + num(q.value) + ")";
        case Magnitude::infinite: return "infinite";
        case Magnitude::inconclusive: return "inconclusive";
    }
    return "?";
}

std::string describe(const LimitValue& l) {
    switch (l.kind) {
        case LimitKind::zero: return "zero";
        case LimitKind::positive: return "positive(" + num(l.value) + ")";
        case LimitKind::infinite: return "infinite";
        case LimitKind::inconclusive: return "inconclusive";
    }
    return "?";
}

HypothesisCheck expect_infinite(const std::string& name, const Quantity& q) {
    CheckStatus s = q.infinite() ? CheckStatus::holds
                                 : (q.finite() ? CheckStatus::fails : CheckStatus::inconclusive);
    return {name, s, describe(q)};
}

HypothesisCheck expect_finite(const std::string& name, const Quantity& q) {
    CheckStatus s = q.finite() ? CheckStatus::holds
                               : (q.infinite() ? CheckStatus::fails : CheckStatus::inconclusive);
    return {name, s, describe(q)};
}

HypothesisCheck expect_infinite(const std::string& name, Magnitude m) {
    CheckStatus s = m == Magnitude::infinite
                        ? CheckStatus::holds
                        : (m == Magnitude::finite ? CheckStatus::fails : CheckStatus::inconclusive);
    return {name, s, magnitude_name(m)};
}

HypothesisCheck expect_zero_limit(const std::string& name, const LimitValue& l) {
    CheckStatus s = l.is_zero() ? CheckStatus::holds
                                : (l.kind == LimitKind::inconclusive ? CheckStatus::inconclusive
                                                                     : CheckStatus::fails);
    return {name, s, describe(l)};
}

HypothesisCheck expect_positive_limit(const std::string& name, const LimitValue& l) {
    CheckStatus s = l.is_positive() ? CheckStatus::holds
                                    : (l.kind == LimitKind::inconclusive ? CheckStatus::inconclusive
                                                                         : CheckStatus::fails);
    return {name, s, describe(l)};
}

HypothesisCheck from_tristate(const std::string& name, TriState t, const std::string& evidence) {
    CheckStatus s = t == TriState::yes
                        ? CheckStatus::holds
                        : (t == TriState::no ? CheckStatus::fails : CheckStatus::inconclusive);
    return {name, s, evidence};
}

CheckStatus combine(const std::vector<HypothesisCheck>& checks) {
    bool any_inconclusive = false;
    for (const auto& c : checks) {
        if (c.status == CheckStatus::fails) return CheckStatus::fails;
        if (c.status == CheckStatus::inconclusive) any_inconclusive = true;
    }
    return any_inconclusive ? CheckStatus::inconclusive : CheckStatus::holds;
}

TheoremVerdict finish(TheoremVerdict v) {
    v.outcome = combine(v.checks);
    if (!v.certified()) {
        v.conclusion.clear();
        v.certified_range.reset();
    }
    return v;
}

std::string fiber_word(bool preset) { return preset ? "spheres about the origin" : "vertical fibers"; }

}  // namespace

const char* check_status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::holds: return "holds";
        case CheckStatus::fails: return "fails";
        case CheckStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

const char* conclusion_mode_name(ConclusionMode m) {
    switch (m) {
        case ConclusionMode::all_volumes: return "all_volumes";
        case ConclusionMode::half_volume: return "half_volume";
        case ConclusionMode::net_zero: return "net_zero";
        case ConclusionMode::single_volumes: return "single_volumes";
        case ConclusionMode::above_threshold: return "above_threshold";
        case ConclusionMode::criterion_only: return "criterion_only";
    }
    return "?";
}

bool CertificationReport::any_certified() const {
    for (const auto& t : theorems)
        if (t.certified() && t.mode != ConclusionMode::criterion_only) return true;
    return false;
}

const TheoremVerdict* CertificationReport::find(const std::string& id) const {
    for (const auto& t : theorems)
        if (t.id == id) return &t;
    return nullptr;
}

namespace {

// ---------------------------------------------------------------------------
// Individual theorem checklists.

struct Context {
    const SpaceSpec& space;
    const FinitenessReport& fin;
    const ProfileCurve& profile;
    const ConvexityVerdict& conv;
    const ClassifyOptions& opts;
};

HypothesisCheck convex_profile_check(const Context& ctx) {
    const std::string ev = "violations: " + std::to_string(ctx.conv.violations.size()) +
                           " of " + std::to_string(ctx.profile.size()) + " samples";
    return from_tristate("fiber area is a convex function of signed volume",
                         ctx.conv.convex_everywhere, ev);
}

TheoremVerdict all_volumes_case(const Context& ctx, bool lower_end) {
    TheoremVerdict v;
    v.id = lower_end ? "fibers-all-volumes@lower" : "fibers-all-volumes@upper";
    v.mode = ConclusionMode::all_volumes;
    const Quantity& vol_end = lower_end ? ctx.fin.volume_at_lower : ctx.fin.volume_at_upper;
    const LimitValue& area_end = lower_end ? ctx.fin.area_limit_lower : ctx.fin.area_limit_upper;
    const char* end = lower_end ? "lower" : "upper";
    v.checks.push_back(convex_profile_check(ctx));
    v.checks.push_back(expect_infinite("total volume infinite", ctx.fin.total_volume));
    v.checks.push_back(expect_finite(std::string("volume at ") + end + " end finite", vol_end));
    v.checks.push_back(
        expect_zero_limit(std::string("fiber area vanishes at the ") + end + " end", area_end));
    v = finish(v);
    if (v.certified()) {
        v.certified_range = VolumeRange{0.0, std::numeric_limits<double>::infinity(), true, true,
                                        std::string(end) + " end"};
        const bool ball_complements = ctx.profile.preset && !lower_end;
        v.conclusion = fiber_word(ctx.profile.preset) +
                       " minimize vertical surface area among hypersurfaces bounding the same "
                       "volume (measured from the " +
                       end + " end); certified for all volumes" +
                       (ball_complements ? "; on this preset the certified regions are "
                                           "complements of balls about the origin"
                                         : "");
    }
    return v;
}

TheoremVerdict half_volume_case(const Context& ctx, bool lower_end) {
    TheoremVerdict v;
    v.id = lower_end ? "fibers-half-volume@lower" : "fibers-half-volume@upper";
    v.mode = ConclusionMode::half_volume;
    const LimitValue& area_end = lower_end ? ctx.fin.area_limit_lower : ctx.fin.area_limit_upper;
    const Magnitude horiz = lower_end ? ctx.fin.horizontal_integral_to_upper
                                      : ctx.fin.horizontal_integral_to_lower;
    const char* end = lower_end ? "lower" : "upper";
    const char* other = lower_end ? "upper" : "lower";
    v.checks.push_back(convex_profile_check(ctx));
    v.checks.push_back(expect_finite("total volume finite", ctx.fin.total_volume));
    v.checks.push_back(
        expect_zero_limit(std::string("fiber area vanishes at the ") + end + " end", area_end));
    v.checks.push_back(expect_infinite(
        std::string("surface-density integral toward the ") + other + " end diverges", horiz));
    v = finish(v);
    if (v.certified()) {
        const double total = ctx.fin.total_volume.value;
        v.certified_range = VolumeRange{0.0, total / 2.0, true, false, std::string(end) + " end"};
        v.conclusion = fiber_word(ctx.profile.preset) + " bounding volume at most half the total (" +
                       num(total / 2.0) + ", boundary included) from the " + end +
                       " end minimize vertical surface area among finite-surface-area "
                       "hypersurfaces bounding the same volume";
    }
    return v;
}

TheoremVerdict net_zero_case(const Context& ctx) {
    TheoremVerdict v;
    v.id = "fibers-net-zero";
    v.mode = ConclusionMode::net_zero;
    v.checks.push_back(convex_profile_check(ctx));
    v.checks.push_back(expect_infinite("volume at lower end infinite", ctx.fin.volume_at_lower));
    v.checks.push_back(expect_infinite("volume at upper end infinite", ctx.fin.volume_at_upper));
    v.checks.push_back(
        expect_positive_limit("fiber area limit at lower end positive", ctx.fin.area_limit_lower));
    v.checks.push_back(
        expect_positive_limit("fiber area limit at upper end positive", ctx.fin.area_limit_upper));
    v = finish(v);
    if (v.certified()) {
        v.certified_range = VolumeRange{-std::numeric_limits<double>::infinity(),
                                        std::numeric_limits<double>::infinity(), true, true,
                                        "base point"};
        v.conclusion = "every " + std::string(ctx.profile.preset ? "sphere about the origin"
                                                                 : "vertical fiber") +
                       " minimizes vertical surface area among hypersurfaces bounding net "
                       "volume zero with it";
    }
    return v;
}

TheoremVerdict minorant_contacts_case(const Context& ctx) {
    ContactSummary cs = summarize_contacts(ctx.profile, ctx.fin, 1e-6);
    TheoremVerdict v;
    const bool two_sided = cs.orientation == Orientation::signed_from_base;
    v.id = cs.applicable && two_sided ? "fiber-minorant-two-sided" : "fiber-minorant";
    v.mode = cs.applicable && two_sided ? ConclusionMode::net_zero : ConclusionMode::single_volumes;
    if (!cs.applicable) {
        v.checks.push_back({"minorant preconditions",
                            cs.inconclusive ? CheckStatus::inconclusive : CheckStatus::fails,
                            cs.reason});
        return finish(v);
    }
    v.checks.push_back({"minorant preconditions", CheckStatus::holds,
                        two_sided ? "infinite volume at both ends"
                                  : "infinite total volume, finite volume at one end"});
    std::string ranges;
    for (std::size_t i = 0; i < cs.volume_ranges.size(); ++i) {
        if (i) ranges += ", ";
        ranges += "[" + num(cs.volume_ranges[i].first) + ", " + num(cs.volume_ranges[i].second) +
                  "] (radius " + num(cs.radius_ranges[i].first) + ".." +
                  num(cs.radius_ranges[i].second) + ")";
    }
    v.checks.push_back({"envelope touches the curve away from window edges",
                        cs.volume_ranges.empty() ? CheckStatus::fails : CheckStatus::holds,
                        cs.volume_ranges.empty() ? "no valid contact" : ranges});
    v = finish(v);
    if (v.certified()) {
        v.certified_range = VolumeRange{cs.volume_ranges.front().first,
                                        cs.volume_ranges.back().second, false, false,
                                        two_sided ? "base point"
                                                  : (cs.orientation == Orientation::from_lower
                                                         ? "lower end"
                                                         : "upper end")};
        v.conclusion =
            fiber_word(ctx.profile.preset) + " at volumes in " + ranges +
            (two_sided ? " minimize vertical surface area among hypersurfaces bounding net "
                         "volume zero with them (convex minorant with positive end limits)"
                       : " minimize vertical surface area among hypersurfaces bounding the "
                         "same volume (anchored convex minorant)");
    }
    return v;
}

TheoremVerdict threshold_case(const Context& ctx) {
    CertifyResult res = certify_large_fibers(ctx.profile, ctx.fin);
    TheoremVerdict v;
    v.id = "fibers-large-threshold";
    v.mode = ConclusionMode::above_threshold;
    for (const auto& cond : res.conditions)
        v.checks.push_back(from_tristate(cond.name, cond.state, cond.evidence));
    v = finish(v);
    if (v.certified() && res.certificate) {
        const auto& cert = *res.certificate;
        const char* end = cert.orientation == Orientation::from_lower ? "lower end" : "upper end";
        v.certified_range = VolumeRange{cert.v0, std::numeric_limits<double>::infinity(), false,
                                        true, end};
        v.conclusion = fiber_word(ctx.profile.preset) + " bounding volume at least " +
                       num(cert.v0) + " (radius " + num(cert.r0) + ") from the " + end +
                       " minimize vertical surface area among hypersurfaces bounding the same "
                       "volume (three-piece convex minorant)";
    }
    return v;
}

// Simple-density route: log-convex sphere area in r plus volume finiteness.
void simple_density_cases(const Context& ctx, std::vector<TheoremVerdict>& out) {
    HypothesisCheck simple = from_tristate("density is simple (surface equals volume density)",
                                           ctx.profile.simple_density ? TriState::yes : TriState::no,
                                           "");
    std::string cf_evidence =
        ctx.conv.closed_form_available
            ? "min (log area)'' margin " + num(ctx.conv.closed_form_min_margin)
            : "finite differences only";
    HypothesisCheck logconv = from_tristate("sphere area is log-convex in r",
                                            ctx.conv.log_convex_in_r, cf_evidence);

    {
        TheoremVerdict v;
        v.id = "spheres-log-convex-simple.ball-complements";
        v.mode = ConclusionMode::all_volumes;
        v.checks = {simple, logconv,
                    expect_infinite("total volume infinite", ctx.fin.total_volume),
                    expect_finite("volume at infinity finite", ctx.fin.volume_at_upper)};
        v = finish(v);
        if (v.certified()) {
            v.certified_range = VolumeRange{0.0, std::numeric_limits<double>::infinity(), true,
                                            true, "upper end"};
            v.conclusion =
                "spheres about the origin minimize tangential surface area among "
                "hypersurfaces bounding the same volume at infinity; complements of balls "
                "about the origin are certified for every volume";
        }
        out.push_back(std::move(v));
    }
    {
        TheoremVerdict v;
        v.id = "spheres-log-convex-simple.half-volume";
        v.mode = ConclusionMode::half_volume;
        v.checks = {simple, logconv, expect_finite("total volume finite", ctx.fin.total_volume)};
        v = finish(v);
        if (v.certified()) {
            const double total = ctx.fin.total_volume.value;
            v.certified_range = VolumeRange{total / 2.0, total, false, true, "lower end"};
            v.conclusion = "spheres about the origin bounding volume at least half the total (" +
                           num(total / 2.0) +
                           ", boundary included) at the origin minimize tangential surface "
                           "area and are certified";
        }
        out.push_back(std::move(v));
    }
    {
        TheoremVerdict v;
        v.id = "spheres-log-convex-simple.net-zero";
        v.mode = ConclusionMode::net_zero;
        v.checks = {simple, logconv,
                    expect_infinite("volume at origin infinite", ctx.fin.volume_at_lower),
                    expect_infinite("volume at infinity infinite", ctx.fin.volume_at_upper)};
        v = finish(v);
        if (v.certified()) {
            v.certified_range = VolumeRange{-std::numeric_limits<double>::infinity(),
                                            std::numeric_limits<double>::infinity(), true, true,
                                            "base point"};
            v.conclusion =
                "every sphere about the origin minimizes vertical surface area among "
                "hypersurfaces bounding net volume zero with it";
        }
        out.push_back(std::move(v));
    }
}

// Surface-density route: volume density 1, nondecreasing surface density, and
// convexity of (Psi(t^{1/n}) - Psi(0+)) t^{1-1/n}.
TheoremVerdict surface_density_case(const Context& ctx) {
    TheoremVerdict v;
    v.id = "spheres-surface-density";
    v.mode = ConclusionMode::all_volumes;

    bool vol_is_one = true;
    const CompiledExpr vol_c = ctx.space.volume_density.compile();
    const CompiledExpr surf_c = ctx.space.surface_density.compile();
    for (double r : {0.25, 0.7, 1.0, 2.0, 5.5}) {
        EvalResult e = vol_c.try_eval(r);
        if (!e.ok() || std::abs(e.value - 1.0) > 1e-12) vol_is_one = false;
    }
    v.checks.push_back(from_tristate("volume density is 1",
                                     vol_is_one ? TriState::yes : TriState::no, ""));

    bool nondecreasing = true;
    const auto& rr = ctx.profile.r;
    std::vector<double> psi(rr.size());
    for (std::size_t i = 0; i < rr.size(); ++i) {
        EvalResult e = surf_c.try_eval(rr[i]);
        psi[i] = e.ok() ? e.value : std::numeric_limits<double>::quiet_NaN();
    }
    for (std::size_t i = 1; i < rr.size(); ++i)
        if (psi[i] < psi[i - 1] * (1.0 - 1e-12) - 1e-300) nondecreasing = false;
    v.checks.push_back(from_tristate("surface density nondecreasing",
                                     nondecreasing ? TriState::yes : TriState::no, ""));

    LimitEstimate at0 = limit_at_endpoint([&](double r) { return surf_c(r); }, ctx.space.base_point,
                                          0.0, std::abs(surf_c(ctx.space.base_point)));
    CheckStatus psi0_status = (at0.kind == LimitKind::zero || at0.kind == LimitKind::positive)
                                  ? CheckStatus::holds
                                  : (at0.kind == LimitKind::infinite ? CheckStatus::fails
                                                                     : CheckStatus::inconclusive);
    const double psi0 = at0.kind == LimitKind::positive ? at0.value : 0.0;
    v.checks.push_back({"surface density has a finite limit at the origin", psi0_status,
                        describe(LimitValue{at0.kind, at0.value})});

    // Convexity of the shifted-power transform over t = r^n.
    TriState transform_convex = TriState::inconclusive;
    if (psi0_status == CheckStatus::holds) {
        std::vector<double> t, g;
        const double inv_n = 1.0 / ctx.space.dim;
        for (std::size_t i = 0; i < rr.size(); ++i) {
            if (std::isnan(psi[i])) continue;
            const double tv = std::pow(rr[i], ctx.space.dim);
            if (!std::isfinite(tv) || tv <= 0.0) continue;
            t.push_back(tv);
            g.push_back((psi[i] - psi0) * std::pow(tv, 1.0 - inv_n));
        }
        if (t.size() >= 5) {
            ConvexityVerdict cv = check_convexity(t, g);
            transform_convex = cv.convex_everywhere;
        }
    }
    v.checks.push_back(from_tristate("shifted-power transform of the surface density is convex",
                                     transform_convex, ""));
    v = finish(v);
    if (v.certified()) {
        v.certified_range = VolumeRange{0.0, std::numeric_limits<double>::infinity(), true, true,
                                        "lower end"};
        v.conclusion = "balls about the origin are certified isoperimetric for every volume "
                       "(nondecreasing surface density with convex transform)";
    }
    return v;
}

// Volume-density criterion phi' <= -1/r; evidence only, the certification
// itself flows through the general cases.
TheoremVerdict volume_density_case(const Context& ctx) {
    TheoremVerdict v;
    v.id = "spheres-volume-density-criterion";
    v.mode = ConclusionMode::criterion_only;

    bool surf_is_one = true;
    const CompiledExpr surf_c = ctx.space.surface_density.compile();
    for (double r : {0.25, 0.7, 1.0, 2.0, 5.5}) {
        EvalResult e = surf_c.try_eval(r);
        if (!e.ok() || std::abs(e.value - 1.0) > 1e-12) surf_is_one = false;
    }
    v.checks.push_back(from_tristate("surface density is 1",
                                     surf_is_one ? TriState::yes : TriState::no, ""));

    const Expr phi = log(ctx.space.volume_density);
    const CompiledExpr dphi = phi.derivative().compile();
    double sup = -std::numeric_limits<double>::infinity();
    bool all_ok = true;
    for (double r : ctx.profile.r) {
        EvalResult e = dphi.try_eval(r);
        if (!e.ok()) {
            all_ok = false;
            continue;
        }
        sup = std::max(sup, e.value + 1.0 / r);
    }
    TriState crit = !all_ok ? TriState::inconclusive
                            : (sup <= 1e-9 ? TriState::yes : TriState::no);
    v.checks.push_back(from_tristate("phi' + 1/r nonpositive on the grid", crit,
                                     "sup " + num(sup)));
    v = finish(v);
    if (v.certified())
        v.conclusion = "volume-density convexity criterion holds; certification follows from "
                       "the general fiber cases above";
    return v;
}

// Large-sphere criterion for simple densities: density bounded at the origin
// and r*phi'' bounded away from zero on a tail.
TheoremVerdict large_simple_case(const Context& ctx, const TheoremVerdict& threshold) {
    TheoremVerdict v;
    v.id = "spheres-large-simple";
    v.mode = ConclusionMode::above_threshold;
    v.checks.push_back(from_tristate("density is simple (surface equals volume density)",
                                     ctx.profile.simple_density ? TriState::yes : TriState::no,
                                     ""));

    const CompiledExpr surf_c = ctx.space.surface_density.compile();
    LimitEstimate at0 = limit_at_endpoint([&](double r) { return surf_c(r); }, ctx.space.base_point,
                                          0.0, std::abs(surf_c(ctx.space.base_point)));
    CheckStatus origin_ok = at0.kind == LimitKind::positive
                                ? CheckStatus::holds
                                : (at0.kind == LimitKind::inconclusive ? CheckStatus::inconclusive
                                                                       : CheckStatus::fails);
    v.checks.push_back({"density has a finite positive limit at the origin", origin_ok,
                        describe(LimitValue{at0.kind, at0.value})});

    // sup over tail starts r0 of inf_{r > r0} r phi''(r).
    const Expr phi = log(ctx.space.surface_density);
    const CompiledExpr ddphi = phi.derivative().derivative().compile();
    const auto& rr = ctx.profile.r;
    double best = -std::numeric_limits<double>::infinity();
    double best_r0 = rr.front();
    for (int fr : {2, 4, 8, 16, 32}) {
        const std::size_t start = rr.size() - rr.size() / fr;
        if (start >= rr.size()) continue;
        double inf = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (std::size_t i = start; i < rr.size(); ++i) {
            EvalResult e = ddphi.try_eval(rr[i]);
            if (!e.ok()) {
                ok = false;
                break;
            }
            inf = std::min(inf, rr[i] * e.value);
        }
        if (ok && inf > best) {
            best = inf;
            best_r0 = rr[start];
        }
    }
    TriState tail = std::isinf(best) && best < 0 ? TriState::inconclusive
                                                 : (best >= 1e-9 ? TriState::yes : TriState::no);
    v.checks.push_back(from_tristate("r * phi'' bounded away from zero on a tail", tail,
                                     "inf " + num(best) + " beyond r = " + num(best_r0)));
    v.checks.push_back(from_tristate(
        "threshold construction succeeded",
        threshold.certified() ? TriState::yes
                              : (threshold.outcome == CheckStatus::inconclusive
                                     ? TriState::inconclusive
                                     : TriState::no),
        threshold.certified() ? threshold.conclusion : "see fibers-large-threshold"));
    v = finish(v);
    if (v.certified()) {
        v.certified_range = threshold.certified_range;
        v.conclusion = "large spheres about the origin are certified isoperimetric; " +
                       (threshold.certified_range
                            ? "threshold volume " + num(threshold.certified_range->lo)
                            : std::string());
    }
    return v;
}

void add_warnings(const Context& ctx, CertificationReport& rep) {
    // A simple log-convex density cannot have vanishing fiber area toward a
    // finite lower endpoint; seeing both is a numerical inconsistency.
    if (ctx.profile.simple_density && std::isfinite(ctx.space.lower) &&
        ctx.conv.log_convex_in_r == TriState::yes && ctx.fin.area_limit_lower.is_zero()) {
        rep.warnings.push_back(
            "inconsistent evidence: a simple density with log-convex fiber area cannot have "
            "vanishing area toward a finite lower endpoint; re-check tolerances");
    }
    auto positive_small_volume = [&](const Quantity& vol, const LimitValue& area,
                                     const char* end) {
        if (vol.finite() && ctx.fin.total_volume.infinite() && area.is_positive()) {
            rep.warnings.push_back(
                std::string("fiber area stays positive toward the ") + end +
                " end while the volume there vanishes: fibers bounding small volume at that "
                "end cannot be isoperimetric (small-volume nonexistence regime)");
        }
    };
    positive_small_volume(ctx.fin.volume_at_lower, ctx.fin.area_limit_lower, "lower");
    positive_small_volume(ctx.fin.volume_at_upper, ctx.fin.area_limit_upper, "upper");
    if (ctx.profile.partial)
        rep.warnings.push_back("profile curve is partial: a quadrature panel failed to converge");
}

}  // namespace

CertificationReport classify(const SpaceSpec& s, const ClassifyOptions& opts) {
    CertificationReport rep;
    rep.dim = s.dim;
    rep.lower = s.lower;
    rep.upper = s.upper;
    rep.warp = s.warp.str();
    rep.surface_density = s.surface_density.str();
    rep.volume_density = s.volume_density.str();
    rep.fiber_measure = s.fiber_measure;
    rep.base_point = s.base_point;
    rep.preset = s.is_euclidean_punctured_preset();
    rep.simple = s.has_simple_density();

    rep.finiteness = classify_finiteness(s, opts.tol);
    ProfileCurve profile = build_profile(s, opts.grid, opts.tol);
    rep.convexity = check_convexity(profile);

    Context ctx{s, rep.finiteness, profile, rep.convexity, opts};
    rep.theorems.push_back(all_volumes_case(ctx, true));
    rep.theorems.push_back(all_volumes_case(ctx, false));
    rep.theorems.push_back(half_volume_case(ctx, true));
    rep.theorems.push_back(half_volume_case(ctx, false));
    rep.theorems.push_back(net_zero_case(ctx));
    rep.theorems.push_back(minorant_contacts_case(ctx));
    TheoremVerdict threshold = threshold_case(ctx);
    rep.theorems.push_back(threshold);
    if (rep.preset) {
        if (rep.simple) simple_density_cases(ctx, rep.theorems);
        rep.theorems.push_back(surface_density_case(ctx));
        rep.theorems.push_back(volume_density_case(ctx));
        if (rep.simple) rep.theorems.push_back(large_simple_case(ctx, threshold));
    }
    add_warnings(ctx, rep);

    rep.grid.per_octave = opts.grid.per_octave;
    rep.grid.samples = profile.size();
    rep.grid.window_r_lo = profile.r.front();
    rep.grid.window_r_hi = profile.r.back();
    rep.grid.quad_rel_tol = opts.tol.rel;
    rep.grid.seed = opts.seed;
    return rep;
}

ConformalPlaneVerdict classify_conformal_plane(const Expr& phi, const ClassifyOptions& opts) {
    ConformalPlaneVerdict out;
    const CompiledExpr p1 = phi.derivative().compile();
    const CompiledExpr p2 = phi.derivative().derivative().compile();
    double min_margin = std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    double scale = 0.0;
    bool any_fail = false;
    for (int k = -160; k <= 160; ++k) {
        const double r = std::exp2(k / 16.0);
        EvalResult d1 = p1.try_eval(r);
        EvalResult d2 = p2.try_eval(r);
        if (!d1.ok() || !d2.ok()) {
            any_fail = true;
            continue;
        }
        const double rhs = d1.value * d1.value + d1.value / r + 1.0 / (r * r);
        const double margin = d2.value - rhs;
        min_margin = std::min(min_margin, margin);
        max_abs = std::max(max_abs, std::abs(margin));
        scale = std::max({scale, std::abs(d2.value), std::abs(rhs)});
    }
    out.min_margin = min_margin;
    out.max_abs_margin = max_abs;
    const double tol = 1e-9 * std::max(scale, 1.0);
    if (any_fail && !std::isfinite(min_margin)) {
        out.criterion = CheckStatus::inconclusive;
    } else if (min_margin >= -tol) {
        out.criterion = CheckStatus::holds;
        out.holds_with_equality = max_abs <= tol;
    } else {
        out.criterion = CheckStatus::fails;
    }

    // Induced densities of the conformal metric: lengths scale by e^phi and
    // areas by e^{2 phi}.
    SpaceSpec induced = SpaceSpec::euclidean_punctured(2, exp(phi),
                                                       exp(Expr::constant(2.0) * phi));
    out.induced = classify(induced, opts);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string pad(int depth) { return std::string(2 * depth, ' '); }

void text_range(std::ostringstream& os, const VolumeRange& r) {
    os << (r.lo_open ? '(' : '[') << num(r.lo) << ", " << num(r.hi) << (r.hi_open ? ')' : ']')
       << " measured from " << r.measured_from;
}

}  // namespace

std::string CertificationReport::to_text() const {
    std::ostringstream os;
    os << "space:\n";
    os << pad(1) << "dimension: " << dim << "\n";
    os << pad(1) << "interval: [" << num(lower) << ", " << num(upper) << "]\n";
    os << pad(1) << "warp: " << warp << "\n";
    os << pad(1) << "surface_density: " << surface_density << "\n";
    os << pad(1) << "volume_density: " << volume_density << "\n";
    os << pad(1) << "fiber_measure: " << num(fiber_measure) << "\n";
    os << pad(1) << "base_point: " << num(base_point) << "\n";
    os << pad(1) << "preset: " << (preset ? "euclidean_punctured" : "none") << "\n";
    os << pad(1) << "simple_density: " << (simple ? "yes" : "no") << "\n";
    os << "finiteness:\n";
    os << pad(1) << "volume_at_lower: " << describe(finiteness.volume_at_lower) << "\n";
    os << pad(1) << "volume_at_upper: " << describe(finiteness.volume_at_upper) << "\n";
    os << pad(1) << "total_volume: " << describe(finiteness.total_volume) << "\n";
    os << pad(1) << "area_limit_lower: " << describe(finiteness.area_limit_lower) << "\n";
    os << pad(1) << "area_limit_upper: " << describe(finiteness.area_limit_upper) << "\n";
    os << pad(1) << "horizontal_integral_to_lower: "
       << magnitude_name(finiteness.horizontal_integral_to_lower) << "\n";
    os << pad(1) << "horizontal_integral_to_upper: "
       << magnitude_name(finiteness.horizontal_integral_to_upper) << "\n";
    os << "convexity:\n";
    os << pad(1) << "convex_everywhere: " << tristate_name(convexity.convex_everywhere) << "\n";
    os << pad(1) << "eventually_convex_from: "
       << (convexity.eventually_convex_from ? num(*convexity.eventually_convex_from) : "none")
       << "\n";
    os << pad(1) << "log_convex_in_r: " << tristate_name(convexity.log_convex_in_r) << "\n";
    os << pad(1) << "violations: " << convexity.violations.size() << "\n";
    if (convexity.closed_form_available)
        os << pad(1) << "closed_form_min_margin: " << num(convexity.closed_form_min_margin)
           << "\n";
    os << "theorems:\n";
    for (const auto& t : theorems) {
        os << pad(1) << "- id: " << t.id << "\n";
        os << pad(2) << "outcome: "
           << (t.certified() ? "certified"
                             : (t.outcome == CheckStatus::inconclusive ? "not certified (inconclusive)"
                                                                       : "not certified"))
           << "\n";
        os << pad(2) << "mode: " << conclusion_mode_name(t.mode) << "\n";
        os << pad(2) << "checks:\n";
        for (const auto& c : t.checks) {
            os << pad(3) << "- " << c.name << ": " << check_status_name(c.status);
            if (!c.evidence.empty()) os << " [" << c.evidence << "]";
            os << "\n";
        }
        if (t.certified_range) {
            os << pad(2) << "certified_volumes: ";
            text_range(os, *t.certified_range);
            os << "\n";
        }
        if (!t.conclusion.empty()) os << pad(2) << "conclusion: " << t.conclusion << "\n";
    }
    os << "warnings:\n";
    for (const auto& w : warnings) os << pad(1) << "- " << w << "\n";
    os << "grid:\n";
    os << pad(1) << "per_octave: " << grid.per_octave << "\n";
    os << pad(1) << "samples: " << grid.samples << "\n";
    os << pad(1) << "window_r: [" << num(grid.window_r_lo) << ", " << num(grid.window_r_hi)
       << "]\n";
    os << pad(1) << "quad_rel_tol: " << num(grid.quad_rel_tol) << "\n";
    os << pad(1) << "seed: " << grid.seed << "\n";
    return os.str();
}

namespace {

nlohmann::json json_number(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

nlohmann::json json_quantity(const Quantity& q) {
    nlohmann::json j;
    j["kind"] = magnitude_name(q.kind);
    if (q.finite()) {
        j["value"] = json_number(q.value);
        j["error"] = json_number(q.error);
    }
    return j;
}

nlohmann::json json_limit(const LimitValue& l) {
    nlohmann::json j;
    j["kind"] = limit_kind_name(l.kind);
    if (l.kind == LimitKind::positive) j["value"] = json_number(l.value);
    return j;
}

}  // namespace

std::string CertificationReport::to_json() const {
    nlohmann::json j;
    j["space"] = {{"dimension", dim},
                  {"interval", {json_number(lower), json_number(upper)}},
                  {"warp", warp},
                  {"surface_density", surface_density},
                  {"volume_density", volume_density},
                  {"fiber_measure", fiber_measure},
                  {"base_point", base_point},
                  {"preset", preset ? "euclidean_punctured" : "none"},
                  {"simple_density", simple}};
    j["finiteness"] = {
        {"volume_at_lower", json_quantity(finiteness.volume_at_lower)},
        {"volume_at_upper", json_quantity(finiteness.volume_at_upper)},
        {"total_volume", json_quantity(finiteness.total_volume)},
        {"area_limit_lower", json_limit(finiteness.area_limit_lower)},
        {"area_limit_upper", json_limit(finiteness.area_limit_upper)},
        {"horizontal_integral_to_lower",
         magnitude_name(finiteness.horizontal_integral_to_lower)},
        {"horizontal_integral_to_upper",
         magnitude_name(finiteness.horizontal_integral_to_upper)}};
    nlohmann::json conv;
    conv["convex_everywhere"] = tristate_name(convexity.convex_everywhere);
    conv["eventually_convex_from"] = convexity.eventually_convex_from
                                         ? json_number(*convexity.eventually_convex_from)
                                         : nlohmann::json(nullptr);
    conv["log_convex_in_r"] = tristate_name(convexity.log_convex_in_r);
    conv["violation_count"] = convexity.violations.size();
    if (convexity.closed_form_available) {
        conv["closed_form_min_margin"] = json_number(convexity.closed_form_min_margin);
        conv["closed_form_convex_from_r"] = convexity.closed_form_convex_from_r
                                                ? json_number(*convexity.closed_form_convex_from_r)
                                                : nlohmann::json(nullptr);
    }
    j["convexity"] = conv;
    j["theorems"] = nlohmann::json::array();
    for (const auto& t : theorems) {
        nlohmann::json jt;
        jt["id"] = t.id;
        jt["outcome"] = t.certified()
                            ? "certified"
                            : (t.outcome == CheckStatus::inconclusive ? "inconclusive"
                                                                      : "not_certified");
        jt["mode"] = conclusion_mode_name(t.mode);
        jt["checks"] = nlohmann::json::array();
        for (const auto& c : t.checks)
            jt["checks"].push_back({{"name", c.name},
                                    {"status", check_status_name(c.status)},
                                    {"evidence", c.evidence}});
        if (t.certified_range)
            jt["certified_volumes"] = {{"lo", json_number(t.certified_range->lo)},
                                       {"hi", json_number(t.certified_range->hi)},
                                       {"lo_open", t.certified_range->lo_open},
                                       {"hi_open", t.certified_range->hi_open},
                                       {"measured_from", t.certified_range->measured_from}};
        if (!t.conclusion.empty()) jt["conclusion"] = t.conclusion;
        j["theorems"].push_back(jt);
    }
    j["warnings"] = warnings;
    j["grid"] = {{"per_octave", grid.per_octave},
                 {"samples", grid.samples},
                 {"window_r", {json_number(grid.window_r_lo), json_number(grid.window_r_hi)}},
                 {"quad_rel_tol", grid.quad_rel_tol},
                 {"seed", grid.seed}};
    return j.dump(2);
}

}  // namespace isofiber
