#pragma once

#include <stdexcept>

namespace trfc {

/**
 * @brief Magic-formula longitudinal tire parameters.
 *
 * The force produced by the model is normalized by vertical load, so D is
 * the peak tire-road friction coefficient the curve can reach.
 */
struct TireParams {
    double stiffness_b = 10.0;  ///< stiffness factor B, > 0
    double shape_c = 2.0;       ///< shape factor C, > 0; typical passenger-car range [1.9, 2.3]
    double peak_d = 0.85;       ///< peak factor D, normalized force units, >= 0
    double curvature_e = 1.0;   ///< curvature factor E; the simplified form fixes E = 1
};

/// Thrown by critical_slip_ratio when the requested branch index has no
/// physical critical point (the nested tangent would wrap).
struct BranchDomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// @throws std::invalid_argument naming the offending field.
void validate(const TireParams& params);

/**
 * @brief Longitudinal slip ratio (omega * r_e - v) / max(v, epsilon).
 *
 * Positive under drive, negative under braking. The epsilon floor keeps the
 * ratio finite at standstill.
 * @throws std::invalid_argument for non-positive radius or epsilon.
 */
double slip_ratio(double wheel_angular_velocity, double effective_rolling_radius,
                  double vehicle_velocity, double epsilon = 0.1);

/// Full magic formula: D * sin(C * atan(B*k - E*(B*k - atan(B*k)))).
double force_full(const TireParams& params, double slip);

/// Simplified form (E = 1): D * sin(C * atan(atan(B*k))).
double force_simplified(const TireParams& params, double slip);

/// Closed-form derivative of force_simplified with respect to slip.
double force_derivative(const TireParams& params, double slip);

/// Smallest shape factor for which the simplified curve attains an interior
/// maximum; computed from the curve geometry, never hard-coded.
double min_shape_for_interior_peak();

/**
 * @brief Slip ratio at which force_simplified peaks, branch n.
 *
 * Evaluates (1/B) * tan(tan(pi/(2C) + n*pi/C)). Both nested tangents must
 * stay on their principal branch; wrapped branches do not correspond to a
 * physical force peak.
 * @throws BranchDomainError when branch n fails the principal-branch check.
 * @throws std::invalid_argument for non-positive B.
 */
double critical_slip_ratio(double stiffness_b, double shape_c, int branch = 0);

/// Maximum of force_simplified over slip in (0, 1].
struct PeakResult {
    double value = 0.0;         ///< peak normalized force
    double slip_at_peak = 0.0;  ///< argmax slip ratio
    bool interior = false;      ///< false: no interior peak, supremum taken at the domain edge
};

/// Peak tire-road friction coefficient. Analytically D when the peak is
/// interior; otherwise the force at the domain edge, flagged non-interior.
PeakResult peak_trfc(const TireParams& params);

}  // namespace trfc
