#pragma once

// Independent re-evaluation of a candidate excitation plan, built only from
// public pieces: ego kinematics, the worst-case neighbor rollouts, the
// planning objective, and the safety constraints. Shared by the unit tests
// and the acceptance suite so both compare the planner against the same
// brute-force ground truth.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "trfc/controller.hpp"
#include "trfc/estimator.hpp"

namespace plan_oracle {

struct PlanCheck {
    double objective = 0.0;
    bool feasible = false;
};

inline PlanCheck evaluate_plan(const trfc::ControllerConfig& config,
                               const trfc::ErrorModel& error_model,
                               const trfc::IdmParams& idm,
                               const trfc::ScenarioState& initial,
                               const std::vector<double>& accels) {
    const int horizon = static_cast<int>(accels.size());
    const auto leader = trfc::propagate_worst_case_preceding(
        initial.preceding, config.preceding_max_decel, config.dt, horizon);
    const auto follower = trfc::propagate_worst_case_preceding(
        initial.following, config.follower_max_decel, config.dt, horizon);

    std::vector<trfc::VehiclePoint> ego(horizon + 1);
    ego[0] = initial.ego;
    for (int t = 0; t < horizon; ++t) {
        const double v_next = std::max(ego[t].velocity + accels[t] * config.dt, 0.0);
        ego[t + 1] = {ego[t].position + (ego[t].velocity + v_next) * config.dt / 2.0,
                      v_next};
    }

    PlanCheck out;
    out.feasible = true;
    double prev = config.prev_accel;
    for (double a : accels) {
        out.objective += trfc::evaluate_error(error_model, a) +
                         config.oscillation_sign * config.lambda * (a - prev) * (a - prev);
        prev = a;
    }
    for (int t = 1; t <= horizon; ++t) {
        if (leader[t].position - ego[t].position < config.ordering_margin - 1e-6)
            out.feasible = false;
        if (ego[t].position - follower[t].position < config.ordering_margin - 1e-6)
            out.feasible = false;
        const trfc::IdmResult response = trfc::idm_acceleration(
            idm, follower[t].velocity, follower[t].position, ego[t].velocity,
            ego[t].position, config.follower_max_decel);
        if (response.gap_violation) out.feasible = false;
        if (response.accel < -config.follower_max_decel - 1e-6) out.feasible = false;
    }
    return out;
}

/// Exhaustive search over every length-`horizon` plan drawn from `levels`.
/// Returns the lowest feasible objective, or +infinity when none is feasible.
inline double best_feasible_on_grid(const trfc::ControllerConfig& config,
                                    const trfc::ErrorModel& error_model,
                                    const trfc::IdmParams& idm,
                                    const trfc::ScenarioState& initial,
                                    const std::vector<double>& levels,
                                    int horizon) {
    std::vector<double> accels(static_cast<std::size_t>(horizon), levels.front());
    std::vector<std::size_t> index(static_cast<std::size_t>(horizon), 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        for (int t = 0; t < horizon; ++t) accels[t] = levels[index[t]];
        const PlanCheck check = evaluate_plan(config, error_model, idm, initial, accels);
        if (check.feasible) best = std::min(best, check.objective);
        int pos = 0;
        while (pos < horizon) {
            if (++index[pos] < levels.size()) break;
            index[pos] = 0;
            ++pos;
        }
        if (pos == horizon) break;
    }
    return best;
}

}  // namespace plan_oracle
