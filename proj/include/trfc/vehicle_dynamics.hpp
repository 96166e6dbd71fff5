#pragma once

#include <stdexcept>

#include "trfc/tire_model.hpp"

namespace trfc {

/// Four-wheel longitudinal vehicle parameters. Left/right wheels on an axle
/// carry identical load and slip (no lateral dynamics), so all per-axle
/// quantities are per wheel and the four-wheel sum is 2 * (front + rear).
struct VehicleParams {
    double mass = 1500.0;              ///< kg
    double cg_to_front_axle = 1.4;     ///< m, symbol a
    double cg_to_rear_axle = 1.4;      ///< m, symbol b
    double cg_height = 0.5;            ///< m
    double air_density = 1.2;          ///< kg/m^3
    double drag_coefficient = 0.3;     ///< dimensionless, >= 0
    double frontal_area = 2.2;         ///< m^2
    double rolling_radius = 0.3;       ///< m, effective
    double gravity = 9.81;             ///< m/s^2, fixed

    /// Wheelbase, maintained as a + b by construction.
    double wheelbase() const { return cg_to_front_axle + cg_to_rear_axle; }
};

void validate(const VehicleParams& params);

/// Per-wheel vertical loads under longitudinal load transfer.
struct WheelLoads {
    double front_per_wheel = 0.0;  ///< N
    double rear_per_wheel = 0.0;   ///< N

    /// False when the acceleration left the validity envelope and a load
    /// went negative; callers decide whether to warn.
    bool within_envelope() const { return front_per_wheel >= 0.0 && rear_per_wheel >= 0.0; }
};

struct VehicleState {
    double position = 0.0;                     ///< m
    double velocity = 0.0;                     ///< m/s, >= 0
    double acceleration = 0.0;                 ///< m/s^2
    double wheel_angular_velocity_front = 0.0; ///< rad/s
    double wheel_angular_velocity_rear = 0.0;  ///< rad/s
};

/// Thrown when the load/acceleration fixed point fails to converge.
struct FixedPointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Acceleration-dependent axle loads, per wheel:
/// front = (m g / 2L)(b - h a/g), rear = (m g / 2L)(a_dist + h a/g).
/// Never fails on negative loads; check within_envelope().
WheelLoads axle_loads(const VehicleParams& params, double longitudinal_accel);

/// Aerodynamic drag 0.5 * rho * C_d * A_f * v^2.
/// @throws std::invalid_argument for negative velocity.
double drag_force(const VehicleParams& params, double velocity);

/// Net longitudinal acceleration solving the load/acceleration fixed point:
/// a = (sum of per-wheel tire forces - drag - m g sin(slope)) / m, with the
/// per-wheel forces evaluated at loads that themselves depend on a.
/// Per-wheel slip comes from the state's wheel speeds via slip_ratio.
/// @throws FixedPointError when the damped iteration does not converge.
double net_acceleration(const VehicleParams& params, const TireParams& tire,
                        const VehicleState& state, double slope_rad,
                        double slip_epsilon = 0.1);

/// Advances one explicit-Euler step at the commanded wheel slip (applied to
/// both axles): v' = max(v + a dt, 0), x' = x + (v + v') dt / 2. The returned
/// state's wheel speeds realize the commanded slip at the new velocity.
VehicleState step(const VehicleParams& params, const TireParams& tire,
                  const VehicleState& state, double commanded_wheel_slip,
                  double slope_rad, double dt, double slip_epsilon = 0.1);

/// Wheel slip on the stable (rising) branch that realizes the requested
/// acceleration, saturating at the critical slip ratio when the request
/// exceeds what the tire can deliver.
double slip_for_acceleration(const VehicleParams& params, const TireParams& tire,
                             double velocity, double requested_accel,
                             double slope_rad);

}  // namespace trfc
