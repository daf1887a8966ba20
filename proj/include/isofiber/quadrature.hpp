#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace isofiber {

enum class QuadStatus : std::uint8_t {
    converged,
    divergent,
    inconclusive,
    eval_error,
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    QuadStatus status = QuadStatus::inconclusive;

    bool converged() const { return status == QuadStatus::converged; }
};

struct QuadTol {
    double rel = 1e-9;
    double abs = 1e-12;
};

namespace detail {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1]; node 0 first, then symmetric pairs.
struct GK15 {
    static constexpr double nodes[8] = {
        0.000000000000000, 0.207784955007898, 0.405845151377397, 0.586087235467691,
        0.741531185599394, 0.864864423359769, 0.949107912342759, 0.991455371120813};
    static constexpr double wk[8] = {
        0.209482141084728, 0.204432940075298, 0.190350578064785, 0.169004726639267,
        0.140653259715525, 0.104790010322250, 0.063092092629979, 0.022935322010529};
    static constexpr double wg[4] = {
        0.417959183673469, 0.381830050505119, 0.279705391489277, 0.129484966168870};
};

/// One G7K15 panel. Returns false if any sample is non-finite.
template <class F>
bool gk15_panel(const F& f, double a, double b, double& value, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    if (!std::isfinite(f0)) return false;
    double k = GK15::wk[0] * f0;
    double g = GK15::wg[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * GK15::nodes[i];
        const double f1 = f(mid - dx);
        const double f2 = f(mid + dx);
        if (!std::isfinite(f1) || !std::isfinite(f2)) return false;
        k += GK15::wk[i] * (f1 + f2);
        if (i % 2 == 0) g += GK15::wg[i / 2] * (f1 + f2);
    }
    value = k * half;
    const double diff = std::abs(k - g) * std::abs(half);
    err = diff * std::sqrt(diff) * 200.0;
    if (!std::isfinite(err)) err = std::abs(value);
    return true;
}

template <class F>
QuadResult adaptive_impl(const F& f, double a, double b, QuadTol tol, int max_panels) {
    struct Panel {
        double a, b, value, error;
    };
    double v0, e0;
    if (!gk15_panel(f, a, b, v0, e0)) return {0.0, 0.0, QuadStatus::eval_error};
    std::vector<Panel> heap{{a, b, v0, e0}};
    auto cmp = [](const Panel& x, const Panel& y) { return x.error < y.error; };
    double total = v0, total_err = e0;
    int panels = 1;
    while (total_err > std::max(tol.abs, tol.rel * std::abs(total)) && panels < max_panels) {
        std::pop_heap(heap.begin(), heap.end(), cmp);
        Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // interval exhausted in doubles
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end(), cmp);
            break;
        }
        Panel left{worst.a, mid, 0, 0}, right{mid, worst.b, 0, 0};
        if (!gk15_panel(f, left.a, left.b, left.value, left.error) ||
            !gk15_panel(f, right.a, right.b, right.value, right.error))
            return {total, total_err, QuadStatus::eval_error};
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), cmp);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), cmp);
        ++panels;
    }
    // Recompute accumulated error to avoid drift from the incremental updates.
    total = 0.0;
    total_err = 0.0;
    for (const Panel& p : heap) {
        total += p.value;
        total_err += p.error;
    }
    const bool ok = total_err <= std::max(tol.abs, tol.rel * std::abs(total)) * 4.0;
    return {total, total_err, ok ? QuadStatus::converged : QuadStatus::inconclusive};
}

}  // namespace detail

/// Adaptive integration over a finite interval with finite integrand.
template <class F>
QuadResult integrate(const F& f, double a, double b, QuadTol tol = {}, int max_panels = 4000) {
    if (a == b) return {0.0, 0.0, QuadStatus::converged};
    if (a > b) {
        QuadResult r = integrate(f, b, a, tol, max_panels);
        r.value = -r.value;
        return r;
    }
    return detail::adaptive_impl(f, a, b, tol, max_panels);
}

/// Truncation sequence toward `endpoint` (finite or +/-inf) starting from `from`.
/// step k covers [t_k, t_{k+1}] with geometrically shrinking distance to a finite
/// endpoint or geometrically growing reach toward an infinite one.
inline double truncation_point(double from, double endpoint, int k) {
    if (std::isinf(endpoint)) {
        const double scale = std::max(1.0, std::abs(from));
        const double sign = endpoint > 0 ? 1.0 : -1.0;
        return from + sign * scale * (std::ldexp(1.0, k) - 1.0);
    }
    return endpoint + (from - endpoint) * std::ldexp(1.0, -k);
}

/// Improper integral from `from` toward `endpoint`, absolute-value oriented
/// (callers integrate positive densities). Declares divergence when tails stop
/// decaying over 8 consecutive doublings or the sum leaves the representable
/// range; otherwise inconclusive at the step budget.
template <class F>
QuadResult integrate_to_endpoint(const F& f, double from, double endpoint, QuadTol tol = {},
                                 int max_steps = 60) {
    const bool forward = endpoint > from;
    double sum = 0.0, err = 0.0;
    double prev_tail = std::numeric_limits<double>::infinity();
    int flat_count = 0, converged_count = 0;
    for (int k = 0; k < max_steps; ++k) {
        const double t0 = truncation_point(from, endpoint, k);
        const double t1 = truncation_point(from, endpoint, k + 1);
        if (t0 == t1) break;  // resolution exhausted next to a finite endpoint
        QuadResult tail = integrate(f, t0, t1, tol);
        if (tail.status == QuadStatus::eval_error) {
            // Positive integrands that overflow while tails were not decaying
            // are diverging; otherwise we cannot tell.
            return {sum, err, flat_count > 0 || k == 0 ? QuadStatus::divergent
                                                       : QuadStatus::inconclusive};
        }
        sum += tail.value;
        err += tail.error;
        if (std::abs(sum) > 1e280) return {sum, err, QuadStatus::divergent};
        const double mag = std::abs(tail.value);
        if (mag <= std::max(tol.abs, tol.rel * std::abs(sum))) {
            if (++converged_count >= 2)
                return {forward ? sum : sum, err + mag, QuadStatus::converged};
        } else {
            converged_count = 0;
        }
        if (mag >= 0.999 * prev_tail && mag > std::max(tol.abs, tol.rel * std::abs(sum))) {
            if (++flat_count >= 8) return {sum, err, QuadStatus::divergent};
        } else {
            flat_count = 0;
        }
        prev_tail = mag;
    }
    return {sum, err, QuadStatus::inconclusive};
}

// ---------------------------------------------------------------------------
// Endpoint limits of positive functions along geometric sequences.

enum class LimitKind : std::uint8_t { zero, positive, infinite, inconclusive };

struct LimitEstimate {
    LimitKind kind = LimitKind::inconclusive;
    double value = 0.0;  // meaningful for `positive`
};

/// Estimates lim f(t) as t -> endpoint along a geometric sequence from `from`.
/// `scale` sets the threshold separating zero from positive limits (1e-7*scale).
template <class F>
LimitEstimate limit_at_endpoint(const F& f, double from, double endpoint, double scale,
                                int max_steps = 48) {
    std::vector<double> vals;
    bool overflowed = false;
    for (int k = 1; k <= max_steps; ++k) {
        const double t = truncation_point(from, endpoint, k);
        if (t == truncation_point(from, endpoint, k - 1)) break;
        const double v = f(t);
        if (!std::isfinite(v)) {
            overflowed = true;
            break;
        }
        vals.push_back(v);
    }
    if (vals.size() < 4) return {LimitKind::inconclusive, 0.0};

    const double cutoff = 1e-7 * std::max(scale, std::numeric_limits<double>::min());
    const std::size_t n = vals.size();

    // Monotone growth with no sign of stabilizing: infinite.
    int grow = 0;
    for (std::size_t i = n >= 9 ? n - 9 : 0; i + 1 < n; ++i)
        if (vals[i + 1] >= vals[i] * (1.0 + 1e-12) && vals[i + 1] > scale) ++grow;
    if (overflowed || (grow >= 8 && vals.back() > 1e3 * std::max(scale, 1.0)))
        return {LimitKind::infinite, 0.0};

    // Aitken delta-squared on the last triple; exact for geometric approach.
    auto aitken = [](double a, double b, double c) {
        const double d1 = b - a, d2 = c - b;
        const double den = d2 - d1;
        if (std::abs(den) <= 1e-12 * (std::abs(d1) + std::abs(d2)) || den == 0.0) return c;
        return c - d2 * d2 / den;
    };
    const double l1 = aitken(vals[n - 4], vals[n - 3], vals[n - 2]);
    const double l2 = aitken(vals[n - 3], vals[n - 2], vals[n - 1]);
    const double spread = std::abs(l2 - l1);
    if (spread <= 1e-4 * std::max(std::abs(l2), cutoff)) {
        if (std::abs(l2) < cutoff) return {LimitKind::zero, 0.0};
        return {LimitKind::positive, l2};
    }
    // Steady decay toward zero counts as a zero limit even if Aitken is noisy.
    bool decaying = true;
    for (std::size_t i = n - std::min<std::size_t>(n, 6); i + 1 < n; ++i)
        if (std::abs(vals[i + 1]) > std::abs(vals[i])) decaying = false;
    if (decaying && std::abs(vals.back()) < cutoff) return {LimitKind::zero, 0.0};
    if (overflowed) return {LimitKind::infinite, 0.0};
    return {LimitKind::inconclusive, 0.0};
}

}  // namespace isofiber
