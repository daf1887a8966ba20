#include "isofiber/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "isofiber/rng.hpp"

namespace isofiber {

namespace {

constexpr QuadTol kPanelTol{1e-12, 1e-300};

double side_point(const SpaceSpec& s, double endpoint, double frac_octaves) {
    if (std::isinf(endpoint)) {
        const double scale = std::max(1.0, std::abs(s.base_point));
        const double sign = endpoint > 0 ? 1.0 : -1.0;
        return s.base_point + sign * scale * (std::exp2(frac_octaves) - 1.0);
    }
    return endpoint + (s.base_point - endpoint) * std::exp2(-frac_octaves);
}

}  // namespace

std::vector<double> sample_radii(const SpaceSpec& s, const GridSpec& grid) {
    const CompiledExpr area = s.area_integrand().compile();
    const CompiledExpr vol = s.volume_integrand().compile();
    auto admissible = [&](double r) {
        if (!(r > s.lower && r < s.upper)) return false;
        if (grid.r_min && r < *grid.r_min) return false;
        if (grid.r_max && r > *grid.r_max) return false;
        EvalResult a = area.try_eval(r);
        EvalResult v = vol.try_eval(r);
        return a.ok() && v.ok() && std::abs(a.value) * s.fiber_measure <= grid.value_cap &&
               std::abs(v.value) <= grid.value_cap;
    };

    std::vector<double> down, up;
    const int steps_down = grid.octaves_down * grid.per_octave;
    for (int j = 1; j <= steps_down; ++j) {
        const double r = side_point(s, s.lower, double(j) / grid.per_octave);
        if (!admissible(r) || (!down.empty() && r >= down.back())) break;
        down.push_back(r);
    }
    const int steps_up = grid.octaves_up * grid.per_octave;
    for (int j = 1; j <= steps_up; ++j) {
        const double r = side_point(s, s.upper, double(j) / grid.per_octave);
        if (!admissible(r) || (!up.empty() && r <= up.back())) break;
        up.push_back(r);
    }

    std::vector<double> radii;
    radii.reserve(down.size() + up.size() + 3);
    for (auto it = down.rbegin(); it != down.rend(); ++it) radii.push_back(*it);
    if (grid.r_min && admissible(*grid.r_min) && (radii.empty() || *grid.r_min < radii.front()))
        radii.insert(radii.begin(), *grid.r_min);
    radii.push_back(s.base_point);
    for (double r : up) radii.push_back(r);
    if (grid.r_max && admissible(*grid.r_max) && *grid.r_max > radii.back())
        radii.push_back(*grid.r_max);
    return radii;
}

ModelSpace reduce(const SpaceSpec& s, const GridSpec& grid, QuadTol tol) {
    std::vector<double> radii = sample_radii(s, grid);
    if (radii.size() < 2) throw std::runtime_error("sampling window is empty");

    ModelSpace m;
    m.volume_integrand_ = s.volume_integrand().compile();
    m.area_integrand_ = s.area_integrand().compile();
    m.omega_ = s.fiber_measure;
    m.tol_ = tol;

    const std::size_t base =
        std::lower_bound(radii.begin(), radii.end(), s.base_point) - radii.begin();
    std::vector<double> panels(radii.size() - 1, 0.0);
    std::size_t hi_end = radii.size(), lo_begin = 0;
    for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
        QuadResult q = integrate(m.volume_integrand_, radii[i], radii[i + 1], kPanelTol, 400);
        if (q.status == QuadStatus::eval_error) {
            if (i >= base)
                hi_end = std::min(hi_end, i + 1);
            else
                lo_begin = std::max(lo_begin, i + 1);
            continue;
        }
        panels[i] = q.value;
    }
    std::vector<double> svals(radii.size(), 0.0);
    for (std::size_t i = base; i + 1 < hi_end; ++i) {
        // A panel too small to advance the cumulative double means the volume
        // coordinate cannot distinguish these radii; the table stops there.
        if (!(panels[i] > 0.0) || svals[i] + panels[i] == svals[i]) {
            hi_end = i + 1;
            break;
        }
        svals[i + 1] = svals[i] + panels[i];
        if (std::abs(svals[i + 1]) > grid.value_cap) {
            hi_end = i + 2;
            break;
        }
    }
    for (std::size_t i = base; i > lo_begin; --i) {
        if (!(panels[i - 1] > 0.0) || svals[i] - panels[i - 1] == svals[i]) {
            lo_begin = i;
            break;
        }
        svals[i - 1] = svals[i] - panels[i - 1];
        if (std::abs(svals[i - 1]) > grid.value_cap) {
            lo_begin = i - 1;
            break;
        }
    }
    if (lo_begin > 0 || hi_end < radii.size()) {
        radii = std::vector<double>(radii.begin() + lo_begin, radii.begin() + hi_end);
        svals = std::vector<double>(svals.begin() + lo_begin, svals.begin() + hi_end);
        panels = std::vector<double>(panels.begin() + lo_begin,
                                     panels.begin() + (hi_end - 1));
    }
    m.r_ = std::move(radii);
    m.s_ = std::move(svals);
    m.panel_ = std::move(panels);

    auto endpoint_of = [&](double end) -> ModelEndpoint {
        QuadResult q = integrate_to_endpoint(m.volume_integrand_, s.base_point, end, tol);
        switch (q.status) {
            case QuadStatus::converged: return {Magnitude::finite, q.value};
            case QuadStatus::divergent: return {Magnitude::infinite, 0.0};
            default: return {Magnitude::inconclusive, 0.0};
        }
    };
    m.endpoint_lower = endpoint_of(s.lower);
    m.endpoint_upper = endpoint_of(s.upper);
    return m;
}

double ModelSpace::forward(double r) const {
    if (r < r_.front() || r > r_.back())
        throw std::out_of_range("radius outside the tabulated window");
    const auto it = std::upper_bound(r_.begin(), r_.end(), r);
    const std::size_t i = std::min<std::size_t>(it - r_.begin(), r_.size() - 1) - 1;
    if (r == r_[i]) return s_[i];
    QuadResult q = integrate(volume_integrand_, r_[i], r, kPanelTol, 400);
    return s_[i] + q.value;
}

double ModelSpace::inverse(double s) const {
    if (s < s_.front() || s > s_.back())
        throw std::out_of_range("coordinate outside the tabulated window");
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    const std::size_t i = std::min<std::size_t>(it - s_.begin(), s_.size() - 1) - 1;
    double lo = r_[i], hi = r_[i + 1];
    if (s == s_[i]) return lo;
    if (s == s_[i + 1]) return hi;
    // Newton from the panel midpoint, with bisection whenever a step escapes.
    double r = 0.5 * (lo + hi);
    for (int iter = 0; iter < 80; ++iter) {
        const double fr = forward(r) - s;
        if (fr > 0)
            hi = r;
        else
            lo = r;
        const double slope = volume_integrand_(r);
        double next = (std::isfinite(slope) && slope > 0.0) ? r - fr / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - r) <= 1e-15 * std::max(1.0, std::abs(r))) return next;
        r = next;
    }
    return r;
}

double ModelSpace::surface_density(double s) const { return area_integrand_(inverse(s)); }

double ModelSpace::surface_density_at_r(double r) const { return area_integrand_(r); }

double ModelSpace::forward_difference(double r0, double r1) const {
    if (r0 > r1) return -forward_difference(r1, r0);
    if (r0 < r_.front() || r1 > r_.back())
        throw std::out_of_range("radius outside the tabulated window");
    auto panel_index = [&](double r) {
        const auto it = std::upper_bound(r_.begin(), r_.end(), r);
        return std::min<std::size_t>(it - r_.begin(), r_.size() - 1) - 1;
    };
    const std::size_t i0 = panel_index(r0);
    const std::size_t i1 = panel_index(r1);
    if (i0 == i1) return integrate(volume_integrand_, r0, r1, kPanelTol, 400).value;
    double sum = integrate(volume_integrand_, r0, r_[i0 + 1], kPanelTol, 400).value;
    for (std::size_t i = i0 + 1; i < i1; ++i) sum += panel_[i];
    sum += integrate(volume_integrand_, r_[i1], r1, kPanelTol, 400).value;
    return sum;
}

std::pair<std::size_t, std::size_t> ModelSpace::conditioned_range() const {
    const auto base_it = std::lower_bound(s_.begin(), s_.end(), 0.0);
    const std::size_t base = std::min<std::size_t>(base_it - s_.begin(), s_.size() - 1);
    auto conditioned = [&](std::size_t panel_index) {
        const double scale = std::max(std::abs(s_[panel_index]), std::abs(s_[panel_index + 1]));
        return std::abs(panel_[panel_index]) >= 1e-6 * scale;
    };
    std::size_t lo = base > 0 ? base - 1 : 0, hi = std::min(base, panel_.size() - 1);
    while (lo > 0 && conditioned(lo - 1)) --lo;
    while (hi + 1 < panel_.size() && conditioned(hi + 1)) ++hi;
    return {lo, hi + 1};
}

PreservationReport verify_preservation(const SpaceSpec& spec, const ModelSpace& m, int trials,
                                       std::uint64_t seed) {
    PreservationReport rep;
    rep.trials = trials;
    rep.seed = seed;
    const auto& r = m.grid_r();
    const auto [cond_lo, cond_hi] = m.conditioned_range();
    auto rel = [](double a, double b) {
        const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
        return std::abs(a - b) / scale;
    };
    auto pick = [&](double u) {
        const std::size_t i = std::min<std::size_t>(std::size_t(u), r.size() - 2);
        return r[i] + (u - double(i)) * (r[i + 1] - r[i]);
    };
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, t);
        // Annulus: direct quadrature against the map's panel sums.
        const double r0 = pick(rng.uniform(0.0, double(r.size() - 1)));
        const double r1 = pick(rng.uniform(0.0, double(r.size() - 1)));
        QuadResult direct = annulus_volume(spec, r0, r1, {1e-12, 1e-300});
        const double via_map = m.fiber_measure() * m.forward_difference(r0, r1);
        if (direct.converged())
            rep.max_volume_rel_error = std::max(rep.max_volume_rel_error,
                                                rel(direct.value, via_map));
        // Fiber: area directly and through the inverse map. Drawn where the
        // volume coordinate is invertible at full precision.
        const double rf = pick(rng.uniform(double(cond_lo), double(cond_hi)));
        const double direct_area = fiber_area(spec, rf);
        const double via_model = m.fiber_measure() * m.surface_density(m.forward(rf));
        rep.max_area_rel_error = std::max(rep.max_area_rel_error, rel(direct_area, via_model));
    }
    return rep;
}

}  // namespace isofiber
