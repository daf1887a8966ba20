#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "isofiber/model.hpp"
#include "isofiber/space.hpp"

namespace isofiber {

enum class TriState : std::uint8_t { yes, no, inconclusive };
const char* tristate_name(TriState t);

/// Fiber surface area as a function of the signed annulus volume from the
/// base point. Derivatives come twice: finite differences of the samples and,
/// where expressions permit, the symbolic route through
/// F'(V) = (d/dr area)/(d/dr volume).
struct ProfileCurve {
    std::vector<double> r;       // ascending sample radii
    std::vector<double> v;       // signed volume from base (includes fiber measure)
    std::vector<double> dv;      // per-panel volume increments, dv[i] = v[i+1]-v[i] exactly
    std::vector<double> f;       // fiber area
    std::vector<double> fp;      // finite-difference dF/dV (NaN at ends)
    std::vector<double> fpp;     // finite-difference d2F/dV2
    std::vector<double> fp_cf;   // symbolic dF/dV
    std::vector<double> fpp_cf;  // symbolic d2F/dV2
    std::vector<double> log_area_d2;  // (log fiber area)'' in r; log-convexity margin

    // Volume between each window edge and the adjacent interval end, computed
    // by its own truncation sequence so absolute parameterizations stay
    // accurate where the signed coordinate flattens.
    Quantity tail_volume_lower;
    Quantity tail_volume_upper;

    int dim = 3;
    double omega = 1.0;
    double base_point = 1.0;
    bool partial = false;             // some quadrature panel failed to converge
    bool closed_form_valid = false;   // symbolic columns mostly evaluable
    bool simple_density = false;
    bool preset = false;              // punctured-R^n preset
    int samples_per_octave = 0;

    std::size_t size() const { return r.size(); }
    std::size_t index_nearest_v(double v_query) const;
    std::size_t index_nearest_r(double r_query) const;

    /// CSV columns V,F,Fp,Fpp; nan for missing derivative estimates,
    /// inf/-inf tokens for non-finite values.
    void write_csv(std::ostream& out) const;
};

ProfileCurve build_profile(const SpaceSpec& s, const GridSpec& grid = {}, QuadTol tol = {});

/// A profile re-parameterized for one of the theorem settings.
enum class Orientation : std::uint8_t {
    signed_from_base,  // x = signed volume from the base point
    from_lower,        // x = volume of (A, r]; needs finite volume at A
    from_upper,        // x = volume of [r, B); needs finite volume at B
};

struct OrientedCurve {
    Orientation orientation = Orientation::signed_from_base;
    std::vector<double> x;  // ascending
    std::vector<double> f;
    std::vector<double> r;  // radius of each sample (matching x order)
};

OrientedCurve orient(const ProfileCurve& p, Orientation o);

struct ConvexityViolation {
    double x = 0.0;
    double second_difference = 0.0;
};

struct ConvexityVerdict {
    TriState convex_everywhere = TriState::inconclusive;
    std::optional<double> eventually_convex_from;  // x-value; absent if violations persist
    TriState log_convex_in_r = TriState::inconclusive;
    std::vector<ConvexityViolation> violations;

    bool closed_form_available = false;
    double closed_form_min_margin = 0.0;  // inf of (log fiber area)'' over the grid
    std::optional<double> closed_form_convex_from_r;
};

ConvexityVerdict check_convexity(const ProfileCurve& p);
ConvexityVerdict check_convexity(const std::vector<double>& x, const std::vector<double>& f);

// ---------------------------------------------------------------------------
// Lower convex envelopes and minorant certificates.

struct EnvelopePoint {
    double x = 0.0;
    double y = 0.0;
};

struct EnvelopeResult {
    std::vector<EnvelopePoint> vertices;  // hull vertices, ascending x
    std::vector<double> value;            // envelope at each input sample
    std::vector<bool> touch;              // per input sample, within touch_rel_tol
    bool anchored = false;

    /// Exact per-sample domination test via the hull's own cross products.
    bool below_or_on(const std::vector<double>& x, const std::vector<double>& y,
                     std::size_t i) const;
};

EnvelopeResult lower_convex_envelope(const std::vector<double>& x, const std::vector<double>& y,
                                     bool anchor_at_zero, double touch_rel_tol = 1e-6);

struct MinorantCertificate {
    enum class Kind : std::uint8_t { anchored, two_sided, threshold };
    Kind kind = Kind::anchored;
    Orientation orientation = Orientation::signed_from_base;
    double v0 = 0.0;         // certified volume (threshold kind: smallest certified volume)
    double r0 = 0.0;         // corresponding radius
    double gap = 0.0;        // curve minus minorant at v0
    double contact_lo = 0.0;  // certified contact range on the sampled grid
    double contact_hi = 0.0;
    std::vector<EnvelopePoint> witness;  // piecewise-linear prefix of the minorant;
                                         // beyond the last vertex it follows the curve
};

struct CertifyCondition {
    std::string name;
    TriState state = TriState::inconclusive;
    std::string evidence;
};

struct CertifyResult {
    enum class Status : std::uint8_t { certified, refused, inconclusive };
    Status status = Status::refused;
    std::optional<MinorantCertificate> certificate;
    std::string reason;  // populated on refusal / inconclusive
    double gap = 0.0;    // curve minus envelope at the queried volume, when meaningful
    std::vector<CertifyCondition> conditions;

    bool certified() const { return status == Status::certified; }
};

/// Single-fiber certificate at volume v0. With one finite-volume end the
/// query volume is measured from that end and the minorant is anchored at
/// (0,0); with infinite volume at both ends the query volume is the signed
/// volume from the base point and the minorant must keep positive limits.
CertifyResult certify_fiber(const ProfileCurve& p, const FinitenessReport& fin, double v0,
                            double touch_rel_tol = 1e-6);

/// Threshold certificate: all fibers beyond the returned volume are certified
/// via a three-piece minorant (chord through the origin, a tangent line, then
/// the curve itself).
CertifyResult certify_large_fibers(const ProfileCurve& p, const FinitenessReport& fin);

/// Full contact set of the single-fiber minorant construction: the grid
/// volumes where the (anchored or two-sided) envelope touches the curve,
/// grouped into closed ranges.
struct ContactSummary {
    bool applicable = false;
    bool inconclusive = false;
    std::string reason;  // when not applicable
    Orientation orientation = Orientation::signed_from_base;
    std::vector<std::pair<double, double>> volume_ranges;
    std::vector<std::pair<double, double>> radius_ranges;  // matching r spans
};

ContactSummary summarize_contacts(const ProfileCurve& p, const FinitenessReport& fin,
                                  double touch_rel_tol = 1e-6);

}  // namespace isofiber
