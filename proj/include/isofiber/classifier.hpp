#pragma once

#include <optional>
#include <string>
#include <vector>

#include "isofiber/profile.hpp"
#include "isofiber/space.hpp"

namespace isofiber {

enum class CheckStatus : std::uint8_t { holds, fails, inconclusive };
const char* check_status_name(CheckStatus s);

/// One named hypothesis with its numeric evidence. Checklists are data so the
/// resulting certificates can be audited line by line.
struct HypothesisCheck {
    std::string name;
    CheckStatus status = CheckStatus::inconclusive;
    std::string evidence;
};

/// What a certified family of fibers is claimed to minimize.
enum class ConclusionMode : std::uint8_t {
    all_volumes,       // every fiber, among hypersurfaces bounding the same volume
    half_volume,       // fibers up to half the total volume from the vanishing end
    net_zero,          // among hypersurfaces bounding net volume zero with the fiber
    single_volumes,    // the certified contact range of a minorant
    above_threshold,   // all volumes beyond a threshold
    criterion_only,    // evidence entry; certifies nothing by itself
};
const char* conclusion_mode_name(ConclusionMode m);

struct VolumeRange {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_open = false;
    bool hi_open = false;
    std::string measured_from;  // "lower end", "upper end", "base point"
};

struct TheoremVerdict {
    std::string id;            // e.g. "fibers-all-volumes@upper"
    CheckStatus outcome = CheckStatus::inconclusive;  // certified / not certified / inconclusive
    std::vector<HypothesisCheck> checks;
    ConclusionMode mode = ConclusionMode::criterion_only;
    std::optional<VolumeRange> certified_range;
    std::string conclusion;    // human-readable statement, empty unless certified

    bool certified() const { return outcome == CheckStatus::holds; }
};

struct GridMetadata {
    int per_octave = 0;
    std::size_t samples = 0;
    double window_r_lo = 0.0;
    double window_r_hi = 0.0;
    double quad_rel_tol = 0.0;
    std::uint64_t seed = 0;
};

struct CertificationReport {
    // Space summary.
    int dim = 0;
    double lower = 0.0, upper = 0.0;
    std::string warp, surface_density, volume_density;
    double fiber_measure = 0.0;
    double base_point = 0.0;
    bool preset = false;
    bool simple = false;

    FinitenessReport finiteness;
    ConvexityVerdict convexity;
    std::vector<TheoremVerdict> theorems;
    std::vector<std::string> warnings;
    GridMetadata grid;

    bool any_certified() const;
    const TheoremVerdict* find(const std::string& id) const;

    std::string to_text() const;
    std::string to_json() const;
};

struct ClassifyOptions {
    GridSpec grid;
    QuadTol tol;
    std::uint64_t seed = 0;
};

/// Runs every applicable hypothesis checklist and collects the verdicts.
CertificationReport classify(const SpaceSpec& s, const ClassifyOptions& opts = {});

/// Punctured plane R^2 - {0} with the conformal metric e^phi ds: checks the
/// radial convexity criterion phi'' >= phi'^2 + phi'/r + 1/r^2, reports the
/// curvature form of the same inequality, and classifies the induced space
/// (surface density e^phi, volume density e^{2 phi}).
struct ConformalPlaneVerdict {
    CheckStatus criterion = CheckStatus::inconclusive;
    bool holds_with_equality = false;
    double min_margin = 0.0;      // inf of phi'' - (phi'^2 + phi'/r + 1/r^2)
    double max_abs_margin = 0.0;  // sup of |margin|, for the equality flag
    CertificationReport induced;  // classification of the induced space
};

ConformalPlaneVerdict classify_conformal_plane(const Expr& phi, const ClassifyOptions& opts = {});

}  // namespace isofiber
