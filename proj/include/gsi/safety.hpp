#ifndef GSI_SAFETY_HPP
#define GSI_SAFETY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gsi/errors.hpp"

namespace gsi {

/// Admissible range for the personalization exponent. The score model needs
/// rho > 0; the upper bound is a safety ceiling well above any value seen in
/// practice. Fits project onto this box instead of diverging to the open
/// boundary when ratings saturate.
inline constexpr double kRhoMin = 0.01;
inline constexpr double kRhoMax = 10.0;

/// Personalization exponent on the normalized safety margin.
/// rho < 1 models tolerance of close interaction, rho > 1 models caution,
/// rho = 1 leaves the margin untouched.
struct Rho {
    double value;

    explicit Rho(double v) : value(v) {
        if (!(v >= kRhoMin && v <= kRhoMax)) {
            throw validation_error("rho " + std::to_string(v) + " outside [" +
                                   std::to_string(kRhoMin) + ", " + std::to_string(kRhoMax) + "]");
        }
    }

    /// Projection onto the admissible box (used by optimizers).
    static Rho clamped(double v) { return Rho(std::clamp(v, kRhoMin, kRhoMax)); }
};

/// Physical constants of the safety index plus the proxemics band edges.
struct SafetyParams {
    double a_max = 0.5;  // max (de-)acceleration magnitude, m/s^2
    double d_min = 0.46; // minimum allowable distance, m (intimate-space edge)
    double d_max = 3.7;  // safe distance, m (public-space edge)
    // intimate/personal, personal/social, social/public boundaries
    std::array<double, 3> zone_edges{0.46, 1.2, 3.7};

    void validate() const {
        if (!(a_max > 0.0)) throw validation_error("a_max must be > 0");
        if (!(0.0 < d_min && d_min < d_max)) throw validation_error("require 0 < d_min < d_max");
        if (!(zone_edges[0] < zone_edges[1] && zone_edges[1] < zone_edges[2])) {
            throw validation_error("zone_edges must be strictly increasing");
        }
    }
};

/// One timestamped reading of a human relative to the robot. v is the
/// relative closing speed (positive when the gap shrinks). The bearing is
/// recorded for completeness but does not enter the safety score.
struct TrajectorySample {
    double t = 0.0;       // s
    double d = 0.0;       // m, >= 0
    double v = 0.0;       // m/s
    double bearing = 0.0; // rad
};

/// Hall's interpersonal bands. Intervals are half-open [lo, hi): a distance
/// exactly on an edge belongs to the farther zone.
enum class ProxemicsZone { Intimate, Personal, Social, Public };

inline const char* to_string(ProxemicsZone z) {
    switch (z) {
        case ProxemicsZone::Intimate: return "Intimate";
        case ProxemicsZone::Personal: return "Personal";
        case ProxemicsZone::Social: return "Social";
        case ProxemicsZone::Public: return "Public";
    }
    return "?";
}

/// Signed stopping distance s(v) * v^2 / (2 a_max). The sign tracks whether
/// the gap is closing (v >= 0) or opening; s(0) = +1 by convention (the term
/// vanishes there anyway).
inline double stopping_distance(double v, const SafetyParams& p) {
    const double s = (v < 0.0) ? -1.0 : 1.0;
    return s * v * v / (2.0 * p.a_max);
}

/// Normalized distance surplus beyond stopping distance plus the minimum
/// allowable distance. May be negative or exceed 1; clipping happens in the
/// score itself.
inline double safety_margin(double d, double v, const SafetyParams& p) {
    return (d - (stopping_distance(v, p) + p.d_min)) / (p.d_max - p.d_min);
}

/// Score a precomputed margin. A non-positive margin means the human is
/// inside the danger envelope and scores 0. The margin is clamped to 0
/// before exponentiation: a negative base with fractional rho is undefined
/// over the reals, and the clip's intent is a hard 0 there.
inline double score_from_margin(double margin, Rho rho) {
    if (margin <= 0.0) return 0.0;
    return std::min(std::pow(margin, rho.value), 1.0);
}

/// The personalized safety index: 1 = safe, 0 = at risk.
inline double score(double d, double v, Rho rho, const SafetyParams& p) {
    return score_from_margin(safety_margin(d, v, p), rho);
}

/// d gsi / d rho at fixed margin: m^rho * ln(m) on the interior, 0 wherever
/// the score is clipped (margins <= 0 or >= 1 have no rho sensitivity).
inline double score_grad_rho(double margin, Rho rho) {
    if (margin <= 0.0 || margin >= 1.0) return 0.0;
    return std::pow(margin, rho.value) * std::log(margin);
}

inline ProxemicsZone classify_zone(double d, const SafetyParams& p) {
    if (d < 0.0) throw validation_error("distance must be >= 0");
    if (d < p.zone_edges[0]) return ProxemicsZone::Intimate;
    if (d < p.zone_edges[1]) return ProxemicsZone::Personal;
    if (d < p.zone_edges[2]) return ProxemicsZone::Social;
    return ProxemicsZone::Public;
}

struct CurvePoint {
    double d;
    double gsi;
};

/// Uniformly sampled gsi(d) curve at fixed v and rho, endpoints inclusive.
inline std::vector<CurvePoint> gsi_curve(Rho rho, double v, const SafetyParams& p,
                                         double d_lo, double d_hi, std::size_t n_points) {
    p.validate();
    if (!(d_lo < d_hi)) throw validation_error("gsi_curve: require d_lo < d_hi");
    if (n_points < 2) throw validation_error("gsi_curve: require n_points >= 2");
    std::vector<CurvePoint> out;
    out.reserve(n_points);
    const double step = (d_hi - d_lo) / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double d = (i + 1 == n_points) ? d_hi : d_lo + step * static_cast<double>(i);
        out.push_back({d, score(d, v, rho, p)});
    }
    return out;
}

} // namespace gsi

#endif
