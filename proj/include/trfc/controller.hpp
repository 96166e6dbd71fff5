#pragma once

#include <vector>

#include "trfc/estimator.hpp"

namespace trfc {

/// Planner settings for the slip-excitation optimal control problem.
struct ControllerConfig {
    int horizon_steps = 30;          ///< T >= 1
    double dt = 0.1;                 ///< s, > 0
    double a_min = -8.5;             ///< m/s^2, < 0
    double a_max = 4.0;              ///< m/s^2, > 0
    double preceding_max_decel = 6.0;  ///< m/s^2, assumed worst-case leader braking, > 0
    double follower_max_decel = 6.0;   ///< m/s^2, safety bound on the follower, > 0
    double lambda = 0.01;            ///< oscillation weight, > 0
    double v_threshold = 2.0;        ///< m/s, excitation gate (strict >)
    double prev_accel = 0.0;         ///< m/s^2, applied acceleration before the horizon
    double ordering_margin = 2.0;    ///< m, enforced gap in the ordering constraint
    /// Sign of the oscillation term in the minimized objective
    /// sum_t [ e(a_t) + oscillation_sign * lambda * (a_t - a_{t-1})^2 ].
    /// -1 rewards oscillation (the excitation objective); +1 smooths instead.
    double oscillation_sign = -1.0;
};

void validate(const ControllerConfig& config);

/// Intelligent-driver-model parameters for the following vehicle.
struct IdmParams {
    double desired_speed = 30.0;   ///< m/s (v0)
    double time_headway = 1.5;     ///< s
    double min_gap = 2.0;          ///< m (s0)
    double comfort_accel = 1.5;    ///< m/s^2
    double comfort_decel = 2.0;    ///< m/s^2
    double accel_exponent = 4.0;   ///< dimensionless
    double vehicle_length = 5.0;   ///< m, subtracted from center distance to get the net gap
};

void validate(const IdmParams& params);

struct VehiclePoint {
    double position = 0.0;  ///< m
    double velocity = 0.0;  ///< m/s
};

/// Snapshot of the three-vehicle platoon: preceding ahead of ego ahead of follower.
struct ScenarioState {
    VehiclePoint ego;
    VehiclePoint preceding;
    VehiclePoint following;
};

void validate(const ScenarioState& state);

struct PlannedTrajectory {
    std::vector<double> accelerations;         ///< a_0..a_{T-1}
    std::vector<ScenarioState> predicted_states;  ///< T+1 states, index 0 = initial
    double objective_value = 0.0;
    bool feasible = false;
    bool suboptimal = false;  ///< best feasible incumbent returned after a solver stall
};

struct IdmResult {
    double accel = 0.0;
    bool gap_violation = false;  ///< net gap was non-positive; accel is the emergency value
};

/// IDM car-following law for the follower reacting to a leader. A non-positive
/// net gap (centers closer than one vehicle length) returns -emergency_decel
/// with the violation flagged.
IdmResult idm_acceleration(const IdmParams& params, double follower_v, double follower_x,
                           double leader_v, double leader_x, double emergency_decel);

/// Worst-case braking rollout: velocity drops by decel*dt each step, clamped
/// at zero; position advances by the trapezoid rule. Returns steps+1 points
/// including the start.
std::vector<VehiclePoint> propagate_worst_case_preceding(VehiclePoint start, double decel,
                                                         double dt, int steps);

/// Plans the ego acceleration sequence minimizing expected estimation error
/// plus the signed oscillation term, against a worst-case braking leader and
/// a bounded IDM follower. The returned plan is verified feasible by exact
/// forward simulation (constraint tolerance 1e-6); when no feasible plan is
/// found, the constant-a_min fallback is returned flagged infeasible.
PlannedTrajectory plan(const ControllerConfig& config, const ErrorModel& error_model,
                       const IdmParams& idm, const ScenarioState& initial);

struct GateResult {
    double accel = 0.0;
    bool excitation_active = false;  ///< true when the planner ran (gate open)
    bool feasible = true;            ///< false only when the planner fell back
};

/// Receding-horizon step: above the velocity gate (strict) solve the plan and
/// apply its first move; at or below it, follow the preceding vehicle with the
/// nominal IDM law clamped to the acceleration box.
GateResult gate_and_step(const ControllerConfig& config, const ErrorModel& error_model,
                         const IdmParams& idm, const ScenarioState& current);

}  // namespace trfc
