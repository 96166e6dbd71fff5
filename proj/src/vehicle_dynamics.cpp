#include "trfc/vehicle_dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace trfc {

void validate(const VehicleParams& params) {
    if (!(params.mass > 0.0))
        throw std::invalid_argument("VehicleParams.mass must be > 0");
    if (!(params.cg_to_front_axle > 0.0))
        throw std::invalid_argument("VehicleParams.cg_to_front_axle must be > 0");
    if (!(params.cg_to_rear_axle > 0.0))
        throw std::invalid_argument("VehicleParams.cg_to_rear_axle must be > 0");
    if (!(params.cg_height > 0.0))
        throw std::invalid_argument("VehicleParams.cg_height must be > 0");
    if (!(params.air_density > 0.0))
        throw std::invalid_argument("VehicleParams.air_density must be > 0");
    if (!(params.drag_coefficient >= 0.0))
        throw std::invalid_argument("VehicleParams.drag_coefficient must be >= 0");
    if (!(params.frontal_area > 0.0))
        throw std::invalid_argument("VehicleParams.frontal_area must be > 0");
    if (!(params.rolling_radius > 0.0))
        throw std::invalid_argument("VehicleParams.rolling_radius must be > 0");
    if (!(params.gravity > 0.0))
        throw std::invalid_argument("VehicleParams.gravity must be > 0");
}

WheelLoads axle_loads(const VehicleParams& params, double longitudinal_accel) {
    const double mg = params.mass * params.gravity;
    const double scale = mg / (2.0 * params.wheelbase());
    const double shift = params.cg_height * longitudinal_accel / params.gravity;
    WheelLoads loads;
    loads.front_per_wheel = scale * (params.cg_to_rear_axle - shift);
    loads.rear_per_wheel = scale * (params.cg_to_front_axle + shift);
    return loads;
}

double drag_force(const VehicleParams& params, double velocity) {
    if (velocity < 0.0)
        throw std::invalid_argument("drag_force: velocity must be >= 0");
    return 0.5 * params.air_density * params.drag_coefficient * params.frontal_area *
           velocity * velocity;
}

double net_acceleration(const VehicleParams& params, const TireParams& tire,
                        const VehicleState& state, double slope_rad,
                        double slip_epsilon) {
    const double kappa_front = slip_ratio(state.wheel_angular_velocity_front,
                                          params.rolling_radius, state.velocity,
                                          slip_epsilon);
    const double kappa_rear = slip_ratio(state.wheel_angular_velocity_rear,
                                         params.rolling_radius, state.velocity,
                                         slip_epsilon);
    const double mu_front = force_simplified(tire, kappa_front);
    const double mu_rear = force_simplified(tire, kappa_rear);
    const double drag = drag_force(params, state.velocity);
    const double gravity_term = params.mass * params.gravity * std::sin(slope_rad);

    const auto balance = [&](double accel) {
        const WheelLoads loads = axle_loads(params, accel);
        const double tire_force =
            2.0 * (mu_front * loads.front_per_wheel + mu_rear * loads.rear_per_wheel);
        return (tire_force - drag - gravity_term) / params.mass;
    };

    // Damped fixed point between the loads and the acceleration they depend
    // on; contractive because h/L < 1 bounds the load-transfer feedback.
    double accel = state.acceleration;
    constexpr double kRelaxation = 0.5;
    constexpr double kTolerance = 1e-9;
    constexpr int kMaxIterations = 50;
    for (int i = 0; i < kMaxIterations; ++i) {
        const double next = balance(accel);
        if (std::abs(next - accel) < kTolerance)
            return next;
        accel += kRelaxation * (next - accel);
    }
    throw FixedPointError("net_acceleration: load/acceleration fixed point did not converge");
}

VehicleState step(const VehicleParams& params, const TireParams& tire,
                  const VehicleState& state, double commanded_wheel_slip,
                  double slope_rad, double dt, double slip_epsilon) {
    if (!(dt > 0.0))
        throw std::invalid_argument("step: dt must be > 0");
    const auto wheel_speed_for = [&](double velocity) {
        return (velocity + commanded_wheel_slip * std::max(velocity, slip_epsilon)) /
               params.rolling_radius;
    };

    VehicleState at_slip = state;
    at_slip.wheel_angular_velocity_front = wheel_speed_for(state.velocity);
    at_slip.wheel_angular_velocity_rear = at_slip.wheel_angular_velocity_front;
    const double accel = net_acceleration(params, tire, at_slip, slope_rad, slip_epsilon);

    VehicleState next;
    next.velocity = std::max(state.velocity + accel * dt, 0.0);
    next.position = state.position + (state.velocity + next.velocity) * dt / 2.0;
    next.acceleration = accel;
    next.wheel_angular_velocity_front = wheel_speed_for(next.velocity);
    next.wheel_angular_velocity_rear = next.wheel_angular_velocity_front;
    return next;
}

double slip_for_acceleration(const VehicleParams& params, const TireParams& tire,
                             double velocity, double requested_accel,
                             double slope_rad) {
    // With identical slip on all four wheels the load-transfer terms cancel
    // and the tire contribution is exactly mu(kappa) * g, so the inversion
    // reduces to solving force_simplified on its rising branch.
    const double drag = drag_force(params, velocity);
    double mu_target = (requested_accel + drag / params.mass +
                        params.gravity * std::sin(slope_rad)) /
                       params.gravity;

    double slip_limit = 1.0;
    try {
        slip_limit = std::min(critical_slip_ratio(tire.stiffness_b, tire.shape_c, 0), 1.0);
    } catch (const BranchDomainError&) {
        slip_limit = 1.0;
    }
    const double mu_limit = force_simplified(tire, slip_limit);
    mu_target = std::clamp(mu_target, -mu_limit, mu_limit);

    const double magnitude = std::abs(mu_target);
    double lo = 0.0;
    double hi = slip_limit;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (force_simplified(tire, mid) < magnitude)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15)
            break;
    }
    const double slip = 0.5 * (lo + hi);
    return mu_target < 0.0 ? -slip : slip;
}

}  // namespace trfc
