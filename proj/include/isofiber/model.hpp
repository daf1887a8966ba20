#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "isofiber/space.hpp"

namespace isofiber {

/// Sampling layout shared by the model reduction and the profile curve:
/// distances to each interval end halve once per octave (log-uniform near a
/// finite end, doubling reach toward an infinite one), `per_octave` samples
/// within each octave.
struct GridSpec {
    int per_octave = 32;
    int octaves_down = 20;
    int octaves_up = 20;
    double value_cap = 1e45;  // stop extending where fiber area or |s| exceeds this
    std::optional<double> r_min;
    std::optional<double> r_max;
};

/// One symbolic-or-finite interval endpoint of the model space.
struct ModelEndpoint {
    Magnitude kind = Magnitude::inconclusive;
    double value = 0.0;  // valid when finite
};

/// Image of a warped product under the volume-coordinate change: an interval
/// in the coordinate s(r) = integral_a^r Psi_V g^{n-1} dt carrying volume
/// density 1 and the one-dimensional surface density
/// Psi(s) = Psi_S(r(s)) g(r(s))^{n-1}. Annulus volumes become fiber_measure
/// times s-differences; fiber areas become fiber_measure times Psi.
class ModelSpace {
  public:
    double forward(double r) const;   // s(r), r inside the tabulated window
    double inverse(double s) const;   // r(s), monotone bracketing + Newton refinement
    double surface_density(double s) const;        // Psi(s)
    double surface_density_at_r(double r) const;   // Psi(s(r)) without the round trip

    /// s(r1) - s(r0) summed over the stored panels; keeps full relative
    /// accuracy even where the cumulative values nearly cancel.
    double forward_difference(double r0, double r1) const;

    /// Index range [lo, hi] of grid panels where the volume coordinate is
    /// numerically invertible (panel integral not drowned by the cumulative
    /// magnitude).
    std::pair<std::size_t, std::size_t> conditioned_range() const;

    double window_lower_r() const { return r_.front(); }
    double window_upper_r() const { return r_.back(); }
    double window_lower_s() const { return s_.front(); }
    double window_upper_s() const { return s_.back(); }
    const std::vector<double>& grid_r() const { return r_; }
    const std::vector<double>& grid_s() const { return s_; }
    const std::vector<double>& grid_panels() const { return panel_; }
    double fiber_measure() const { return omega_; }

    ModelEndpoint endpoint_lower;  // s(A), possibly infinite
    ModelEndpoint endpoint_upper;  // s(B)

  private:
    friend ModelSpace reduce(const SpaceSpec&, const GridSpec&, QuadTol);
    std::vector<double> r_, s_;
    std::vector<double> panel_;  // panel_[i] = s_{i+1} - s_i, exact per-panel quadrature
    CompiledExpr volume_integrand_;
    CompiledExpr area_integrand_;
    double omega_ = 1.0;
    QuadTol tol_;
};

ModelSpace reduce(const SpaceSpec& s, const GridSpec& grid = {}, QuadTol tol = {});

struct PreservationReport {
    double max_volume_rel_error = 0.0;
    double max_area_rel_error = 0.0;
    int trials = 0;
    std::uint64_t seed = 0;

    double max_rel_error() const {
        return max_volume_rel_error > max_area_rel_error ? max_volume_rel_error
                                                         : max_area_rel_error;
    }
};

/// Spot-checks that the reduction preserves annulus volumes and fiber areas:
/// for random pairs r0 < r1, annulus_volume must match fiber_measure *
/// (s(r1) - s(r0)); for random fibers, fiber_area must match fiber_measure *
/// Psi(s(r)) through the inverse map.
PreservationReport verify_preservation(const SpaceSpec& s, const ModelSpace& m, int trials,
                                       std::uint64_t seed);

/// The sampling radii the reduction would use (exposed for the profile).
std::vector<double> sample_radii(const SpaceSpec& s, const GridSpec& grid);

}  // namespace isofiber
