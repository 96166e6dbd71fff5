#include "trfc/tire_model.hpp"

#include <cmath>
#include <numbers>

namespace trfc {

namespace {
constexpr double kHalfPi = std::numbers::pi / 2.0;
}

void validate(const TireParams& params) {
    if (!(params.stiffness_b > 0.0))
        throw std::invalid_argument("TireParams.stiffness_b must be > 0");
    if (!(params.shape_c > 0.0))
        throw std::invalid_argument("TireParams.shape_c must be > 0");
    if (!(params.peak_d >= 0.0))
        throw std::invalid_argument("TireParams.peak_d must be >= 0");
    if (!std::isfinite(params.curvature_e))
        throw std::invalid_argument("TireParams.curvature_e must be finite");
}

double slip_ratio(double wheel_angular_velocity, double effective_rolling_radius,
                  double vehicle_velocity, double epsilon) {
    if (!(effective_rolling_radius > 0.0))
        throw std::invalid_argument("effective_rolling_radius must be > 0");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("epsilon must be > 0");
    const double circumferential = wheel_angular_velocity * effective_rolling_radius;
    return (circumferential - vehicle_velocity) / std::max(vehicle_velocity, epsilon);
}

double force_full(const TireParams& params, double slip) {
    const double bx = params.stiffness_b * slip;
    const double inner = bx - params.curvature_e * (bx - std::atan(bx));
    return params.peak_d * std::sin(params.shape_c * std::atan(inner));
}

double force_simplified(const TireParams& params, double slip) {
    const double inner = std::atan(std::atan(params.stiffness_b * slip));
    return params.peak_d * std::sin(params.shape_c * inner);
}

double force_derivative(const TireParams& params, double slip) {
    const double bx = params.stiffness_b * slip;
    const double t = std::atan(bx);
    const double outer = std::cos(params.shape_c * std::atan(t));
    return params.peak_d * params.shape_c * outer * params.stiffness_b /
           ((1.0 + t * t) * (1.0 + bx * bx));
}

double min_shape_for_interior_peak() {
    // The sine argument sups at C*atan(pi/2); an interior peak needs that to
    // reach pi/2.
    return std::numbers::pi / (2.0 * std::atan(kHalfPi));
}

double critical_slip_ratio(double stiffness_b, double shape_c, int branch) {
    if (!(stiffness_b > 0.0))
        throw std::invalid_argument("stiffness_b must be > 0");
    const double theta = kHalfPi / shape_c + branch * std::numbers::pi / shape_c;
    if (!(theta > -kHalfPi && theta < kHalfPi))
        throw BranchDomainError("critical_slip_ratio: branch argument wraps the inner tangent");
    const double inner = std::tan(theta);
    if (!(inner > -kHalfPi && inner < kHalfPi))
        throw BranchDomainError("critical_slip_ratio: outer tangent off its principal branch");
    return std::tan(inner) / stiffness_b;
}

PeakResult peak_trfc(const TireParams& params) {
    validate(params);
    PeakResult result;
    double csr = 0.0;
    bool has_critical = true;
    try {
        csr = critical_slip_ratio(params.stiffness_b, params.shape_c, 0);
    } catch (const BranchDomainError&) {
        has_critical = false;
    }
    if (has_critical && csr <= 1.0) {
        // Interior peak: the sine reaches 1 exactly, so the maximum is D.
        result.value = params.peak_d;
        result.slip_at_peak = csr;
        result.interior = true;
    } else {
        // Force is strictly increasing up to the edge of the slip domain.
        result.value = force_simplified(params, 1.0);
        result.slip_at_peak = 1.0;
        result.interior = false;
    }
    return result;
}

}  // namespace trfc
