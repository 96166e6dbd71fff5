#include "trfc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace trfc {

namespace {

constexpr double kConstraintTol = 1e-6;
constexpr double kSharpness = 100.0;  // velocity-clamp smoothing during descent
constexpr double kGapFloor = 0.1;     // m, net-gap floor inside the smooth IDM model

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

// log(1 + exp(k u)) / k with overflow guards; approximates max(u, 0).
double softplus(double u) {
    const double ku = kSharpness * u;
    if (ku > 30.0) return u;
    if (ku < -30.0) return 0.0;
    return std::log1p(std::exp(ku)) / kSharpness;
}

double softplus_slope(double u) {
    const double ku = kSharpness * u;
    if (ku > 30.0) return 1.0;
    if (ku < -30.0) return 0.0;
    return 1.0 / (1.0 + std::exp(-ku));
}

// IDM response of a fixed follower to the ego as leader, with partial
// derivatives in the ego (leader) state. The net gap is floored so the
// penalty stays finite when a candidate plan crosses the follower.
struct IdmEval {
    double accel = 0.0;
    double d_leader_x = 0.0;
    double d_leader_v = 0.0;
};

IdmEval smooth_idm(const IdmParams& idm, const VehiclePoint& follower, double leader_x,
                   double leader_v) {
    const double raw_gap = leader_x - follower.position - idm.vehicle_length;
    const double s = std::max(raw_gap, kGapFloor);
    const double dv = follower.velocity - leader_v;
    const double brake_scale = 2.0 * std::sqrt(idm.comfort_accel * idm.comfort_decel);
    const double sstar = idm.min_gap + follower.velocity * idm.time_headway +
                         follower.velocity * dv / brake_scale;
    const double speed_term =
        std::pow(follower.velocity / idm.desired_speed, idm.accel_exponent);
    const double ratio = sstar / s;
    IdmEval out;
    out.accel = idm.comfort_accel * (1.0 - speed_term - ratio * ratio);
    out.d_leader_x =
        raw_gap < kGapFloor ? 0.0 : idm.comfort_accel * 2.0 * sstar * sstar / (s * s * s);
    out.d_leader_v = idm.comfort_accel * 2.0 * sstar * follower.velocity / (s * s * brake_scale);
    return out;
}

double error_cost_slope(const ErrorModel& m, double a) {
    return m.amplitude * std::exp(-a * a / (2.0 * m.width * m.width)) * (-a / (m.width * m.width));
}

// Everything fixed across one plan() call: worst-case neighbor rollouts and
// the configuration the candidate sequences are judged against.
struct Problem {
    const ControllerConfig* config = nullptr;
    const ErrorModel* error_model = nullptr;
    const IdmParams* idm = nullptr;
    std::vector<VehiclePoint> leader;    // index 0..T
    std::vector<VehiclePoint> follower;  // index 0..T, worst-case constant braking
    VehiclePoint ego0;
    int horizon = 0;
};

double objective_only(const Problem& pb, const std::vector<double>& a) {
    const auto& c = *pb.config;
    double j = 0.0;
    double prev = c.prev_accel;
    for (double at : a) {
        const double da = at - prev;
        j += evaluate_error(*pb.error_model, at) + c.oscillation_sign * c.lambda * da * da;
        prev = at;
    }
    return j;
}

struct ExactEval {
    double objective = 0.0;
    double worst_violation = 0.0;  // most violated constraint; <= tol means feasible
    bool gap_violation = false;    // planned ego crossed within one vehicle length
    std::vector<VehiclePoint> ego;  // index 0..T
};

ExactEval evaluate_exact(const Problem& pb, const std::vector<double>& a) {
    const auto& c = *pb.config;
    ExactEval out;
    out.ego.resize(pb.horizon + 1);
    out.ego[0] = pb.ego0;
    for (int t = 0; t < pb.horizon; ++t) {
        const double v_next = std::max(out.ego[t].velocity + a[t] * c.dt, 0.0);
        out.ego[t + 1] = {out.ego[t].position + (out.ego[t].velocity + v_next) * c.dt / 2.0,
                          v_next};
    }
    out.objective = objective_only(pb, a);
    for (int t = 1; t <= pb.horizon; ++t) {
        out.worst_violation = std::max(
            out.worst_violation,
            c.ordering_margin - (pb.leader[t].position - out.ego[t].position));
        out.worst_violation = std::max(
            out.worst_violation,
            c.ordering_margin - (out.ego[t].position - pb.follower[t].position));
        const IdmResult follower_response = idm_acceleration(
            *pb.idm, pb.follower[t].velocity, pb.follower[t].position,
            out.ego[t].velocity, out.ego[t].position, c.follower_max_decel);
        if (follower_response.gap_violation) out.gap_violation = true;
        out.worst_violation = std::max(
            out.worst_violation, -(follower_response.accel + c.follower_max_decel));
    }
    return out;
}

bool exact_feasible(const ExactEval& eval) {
    return !eval.gap_violation && eval.worst_violation <= kConstraintTol;
}

// Penalized smooth objective. The optional gradient is computed by one
// backward (adjoint) pass through the smoothed ego kinematics; the forward
// clamp max(v,0) is replaced by softplus so the chain rule applies.
double penalized_value(const Problem& pb, const std::vector<double>& a, double weight,
                       std::vector<double>* grad) {
    const auto& c = *pb.config;
    const auto& idm = *pb.idm;
    const int horizon = pb.horizon;
    const double dt = c.dt;

    std::vector<double> x(horizon + 1), v(horizon + 1), slope(horizon);
    x[0] = pb.ego0.position;
    v[0] = pb.ego0.velocity;
    for (int t = 0; t < horizon; ++t) {
        const double u = v[t] + a[t] * dt;
        slope[t] = softplus_slope(u);
        v[t + 1] = softplus(u);
        x[t + 1] = x[t] + (v[t] + v[t + 1]) * dt / 2.0;
    }

    double total = objective_only(pb, a);
    std::vector<double> dp_dx(horizon + 1, 0.0), dp_dv(horizon + 1, 0.0);
    for (int t = 1; t <= horizon; ++t) {
        const double front = c.ordering_margin - (pb.leader[t].position - x[t]);
        const double rear = c.ordering_margin - (x[t] - pb.follower[t].position);
        const IdmEval response = smooth_idm(idm, pb.follower[t], x[t], v[t]);
        const double bound = -(response.accel + c.follower_max_decel);
        const double band =
            (pb.follower[t].position + idm.vehicle_length + kGapFloor) - x[t];

        const double fv = std::max(front, 0.0);
        const double rv = std::max(rear, 0.0);
        const double iv = std::max(bound, 0.0);
        const double bv = std::max(band, 0.0);
        total += weight * (fv * fv + rv * rv + iv * iv + bv * bv);
        if (grad) {
            dp_dx[t] = 2.0 * fv - 2.0 * rv - 2.0 * iv * response.d_leader_x - 2.0 * bv;
            dp_dv[t] = -2.0 * iv * response.d_leader_v;
        }
    }
    if (!grad) return total;

    grad->assign(horizon, 0.0);
    double adj_x = weight * dp_dx[horizon];
    double adj_v = weight * dp_dv[horizon];
    for (int t = horizon - 1; t >= 0; --t) {
        // Contribution of a[t] through v[t+1] (and x[t+1] via the trapezoid).
        (*grad)[t] += (adj_v + adj_x * dt / 2.0) * slope[t] * dt;
        if (t >= 1) {
            const double next_x = adj_x;
            const double next_v = adj_v;
            adj_x = weight * dp_dx[t] + next_x;
            adj_v = weight * dp_dv[t] + next_x * (dt / 2.0) * (1.0 + slope[t]) +
                    next_v * slope[t];
        }
    }
    double prev = c.prev_accel;
    for (int t = 0; t < horizon; ++t) {
        (*grad)[t] += error_cost_slope(*pb.error_model, a[t]) +
                      c.oscillation_sign * c.lambda * 2.0 * (a[t] - prev);
        if (t + 1 < horizon)
            (*grad)[t] -= c.oscillation_sign * c.lambda * 2.0 * (a[t + 1] - a[t]);
        prev = a[t];
    }
    return total;
}

// Projected-gradient descent with Armijo backtracking at one penalty weight.
void descend_stage(const Problem& pb, std::vector<double>& a, double weight, int max_iters) {
    const auto& c = *pb.config;
    std::vector<double> grad, candidate(a.size());
    double value = penalized_value(pb, a, weight, &grad);
    double alpha = 1.0;
    for (int iter = 0; iter < max_iters; ++iter) {
        double try_alpha = std::min(alpha * 2.0, 1e3);
        bool accepted = false;
        double cand_value = value;
        for (int halving = 0; halving < 40; ++halving) {
            for (std::size_t i = 0; i < a.size(); ++i)
                candidate[i] = clamp(a[i] - try_alpha * grad[i], c.a_min, c.a_max);
            double predicted = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i)
                predicted += grad[i] * (a[i] - candidate[i]);
            cand_value = penalized_value(pb, candidate, weight, nullptr);
            if (cand_value <= value - 1e-4 * predicted && cand_value < value) {
                accepted = true;
                break;
            }
            try_alpha /= 2.0;
        }
        if (!accepted) return;
        const double improvement = value - cand_value;
        a.swap(candidate);
        alpha = try_alpha;
        if (improvement < 1e-10 * (1.0 + std::abs(value))) return;
        value = penalized_value(pb, a, weight, &grad);
    }
}

// All sequences over the given acceleration levels, lexicographic order.
void enumerate_levels(const std::vector<double>& levels, int horizon,
                      std::vector<std::vector<double>>& out) {
    std::vector<int> digit(horizon, 0);
    while (true) {
        std::vector<double> a(horizon);
        for (int i = 0; i < horizon; ++i) a[i] = levels[digit[i]];
        out.push_back(std::move(a));
        int pos = horizon - 1;
        while (pos >= 0 && ++digit[pos] == static_cast<int>(levels.size())) {
            digit[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
}

struct Candidate {
    std::vector<double> a;
    ExactEval eval;
    bool from_backoff = false;
};

}  // namespace

void validate(const ControllerConfig& config) {
    if (config.horizon_steps < 1)
        throw std::invalid_argument("ControllerConfig: horizon_steps must be >= 1");
    if (!(std::isfinite(config.dt) && config.dt > 0.0))
        throw std::invalid_argument("ControllerConfig: dt must be finite and > 0");
    if (!(std::isfinite(config.a_min) && config.a_min < 0.0))
        throw std::invalid_argument("ControllerConfig: a_min must be < 0");
    if (!(std::isfinite(config.a_max) && config.a_max > 0.0))
        throw std::invalid_argument("ControllerConfig: a_max must be > 0");
    if (!(std::isfinite(config.preceding_max_decel) && config.preceding_max_decel > 0.0))
        throw std::invalid_argument("ControllerConfig: preceding_max_decel must be > 0");
    if (!(std::isfinite(config.follower_max_decel) && config.follower_max_decel > 0.0))
        throw std::invalid_argument("ControllerConfig: follower_max_decel must be > 0");
    if (!(std::isfinite(config.lambda) && config.lambda > 0.0))
        throw std::invalid_argument("ControllerConfig: lambda must be > 0");
    if (!(std::isfinite(config.v_threshold) && config.v_threshold >= 0.0))
        throw std::invalid_argument("ControllerConfig: v_threshold must be >= 0");
    if (!std::isfinite(config.prev_accel))
        throw std::invalid_argument("ControllerConfig: prev_accel must be finite");
    if (!(std::isfinite(config.ordering_margin) && config.ordering_margin > 0.0))
        throw std::invalid_argument("ControllerConfig: ordering_margin must be > 0");
    if (!(std::isfinite(config.oscillation_sign) && config.oscillation_sign != 0.0))
        throw std::invalid_argument("ControllerConfig: oscillation_sign must be nonzero");
}

void validate(const IdmParams& params) {
    const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(params.desired_speed))
        throw std::invalid_argument("IdmParams: desired_speed must be > 0");
    if (!positive(params.time_headway))
        throw std::invalid_argument("IdmParams: time_headway must be > 0");
    if (!positive(params.min_gap)) throw std::invalid_argument("IdmParams: min_gap must be > 0");
    if (!positive(params.comfort_accel))
        throw std::invalid_argument("IdmParams: comfort_accel must be > 0");
    if (!positive(params.comfort_decel))
        throw std::invalid_argument("IdmParams: comfort_decel must be > 0");
    if (!positive(params.accel_exponent))
        throw std::invalid_argument("IdmParams: accel_exponent must be > 0");
    if (!positive(params.vehicle_length))
        throw std::invalid_argument("IdmParams: vehicle_length must be > 0");
}

void validate(const ScenarioState& state) {
    const auto finite_point = [](const VehiclePoint& p) {
        return std::isfinite(p.position) && std::isfinite(p.velocity);
    };
    if (!finite_point(state.ego) || !finite_point(state.preceding) ||
        !finite_point(state.following))
        throw std::invalid_argument("ScenarioState: all positions and velocities must be finite");
    if (!(state.preceding.position > state.ego.position &&
          state.ego.position > state.following.position))
        throw std::invalid_argument(
            "ScenarioState: ordering preceding > ego > following is violated");
    if (state.ego.velocity < 0.0 || state.preceding.velocity < 0.0 ||
        state.following.velocity < 0.0)
        throw std::invalid_argument("ScenarioState: velocities must be >= 0");
}

IdmResult idm_acceleration(const IdmParams& params, double follower_v, double follower_x,
                           double leader_v, double leader_x, double emergency_decel) {
    const double gap = leader_x - follower_x - params.vehicle_length;
    if (!(gap > 0.0)) return IdmResult{-emergency_decel, true};
    const double dv = follower_v - leader_v;
    const double brake_scale = 2.0 * std::sqrt(params.comfort_accel * params.comfort_decel);
    const double desired_gap =
        params.min_gap + follower_v * params.time_headway + follower_v * dv / brake_scale;
    const double speed_term = std::pow(follower_v / params.desired_speed, params.accel_exponent);
    const double ratio = desired_gap / gap;
    return IdmResult{params.comfort_accel * (1.0 - speed_term - ratio * ratio), false};
}

std::vector<VehiclePoint> propagate_worst_case_preceding(VehiclePoint start, double decel,
                                                         double dt, int steps) {
    if (!(decel > 0.0))
        throw std::invalid_argument("propagate_worst_case_preceding: decel must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("propagate_worst_case_preceding: dt must be > 0");
    if (steps < 0)
        throw std::invalid_argument("propagate_worst_case_preceding: steps must be >= 0");
    std::vector<VehiclePoint> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    out.push_back(start);
    for (int t = 0; t < steps; ++t) {
        const VehiclePoint& prev = out.back();
        const double v_next = std::max(prev.velocity - decel * dt, 0.0);
        out.push_back({prev.position + (prev.velocity + v_next) * dt / 2.0, v_next});
    }
    return out;
}

PlannedTrajectory plan(const ControllerConfig& config, const ErrorModel& error_model,
                       const IdmParams& idm, const ScenarioState& initial) {
    validate(config);
    validate(error_model);
    validate(idm);
    validate(initial);

    const int horizon = config.horizon_steps;
    Problem pb;
    pb.config = &config;
    pb.error_model = &error_model;
    pb.idm = &idm;
    pb.ego0 = initial.ego;
    pb.horizon = horizon;
    pb.leader = propagate_worst_case_preceding(initial.preceding, config.preceding_max_decel,
                                               config.dt, horizon);
    pb.follower = propagate_worst_case_preceding(initial.following, config.follower_max_decel,
                                                 config.dt, horizon);

    // Seed pool: hand-built patterns always; exhaustive coarse grids only on
    // short horizons, where they certify the solution against enumeration.
    std::vector<std::vector<double>> seeds;
    seeds.emplace_back(horizon, 0.0);
    seeds.emplace_back(horizon, config.a_max);
    std::vector<double> alternating(horizon);
    for (int t = 0; t < horizon; ++t) alternating[t] = (t % 2 == 0) ? config.a_max : config.a_min;
    seeds.push_back(alternating);
    for (int t = 0; t < horizon; ++t) alternating[t] = (t % 2 == 0) ? config.a_min : config.a_max;
    seeds.push_back(alternating);
    seeds.emplace_back(horizon, config.a_min);
    const std::size_t n_hand_seeds = seeds.size();
    if (horizon <= 5) {
        enumerate_levels({config.a_min, config.a_min / 2.0, 0.0, config.a_max / 2.0,
                          config.a_max},
                         horizon, seeds);
    } else if (horizon == 6) {
        enumerate_levels({config.a_min, 0.0, config.a_max}, horizon, seeds);
    }

    std::vector<Candidate> pool;
    pool.reserve(seeds.size() + n_hand_seeds * 2 + 2);
    for (const auto& seed : seeds) pool.push_back({seed, evaluate_exact(pb, seed), false});

    // Polish the hand seeds (plus the best enumerated one on short horizons)
    // through an increasing penalty schedule.
    std::vector<std::size_t> descent_starts;
    for (std::size_t i = 0; i < n_hand_seeds; ++i) descent_starts.push_back(i);
    if (seeds.size() > n_hand_seeds) {
        std::size_t best_enum = n_hand_seeds;
        for (std::size_t i = n_hand_seeds; i < pool.size(); ++i) {
            const bool better =
                (exact_feasible(pool[i].eval) && !exact_feasible(pool[best_enum].eval)) ||
                (exact_feasible(pool[i].eval) == exact_feasible(pool[best_enum].eval) &&
                 pool[i].eval.objective < pool[best_enum].eval.objective);
            if (better) best_enum = i;
        }
        descent_starts.push_back(best_enum);
    }
    for (std::size_t start : descent_starts) {
        std::vector<double> a = pool[start].a;
        for (double weight : {1e3, 1e5, 1e7}) descend_stage(pb, a, weight, 60);
        pool.push_back({a, evaluate_exact(pb, a), false});
    }

    auto best_feasible = [&]() {
        std::size_t best = pool.size();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (!exact_feasible(pool[i].eval)) continue;
            if (best == pool.size() || pool[i].eval.objective < pool[best].eval.objective)
                best = i;
        }
        return best;
    };

    // Pull infeasible descent results back toward the best feasible anchor:
    // keeps their objective gains where only a small constraint overshoot
    // separates them from feasibility.
    const std::size_t anchor = best_feasible();
    if (anchor != pool.size()) {
        const std::vector<double> anchor_a = pool[anchor].a;
        const std::size_t pool_end = pool.size();
        for (std::size_t i = seeds.size(); i < pool_end; ++i) {
            if (exact_feasible(pool[i].eval)) continue;
            std::vector<double> lo = anchor_a;          // feasible end
            std::vector<double> hi = pool[i].a;         // infeasible end
            std::vector<double> mid(lo.size());
            for (int iter = 0; iter < 40; ++iter) {
                for (std::size_t k = 0; k < mid.size(); ++k) mid[k] = 0.5 * (lo[k] + hi[k]);
                if (exact_feasible(evaluate_exact(pb, mid)))
                    lo = mid;
                else
                    hi = mid;
            }
            pool.push_back({lo, evaluate_exact(pb, lo), true});
        }
    }

    PlannedTrajectory out;
    const std::size_t winner = best_feasible();
    const bool have_winner = winner != pool.size();
    const Candidate& chosen =
        have_winner ? pool[winner] : pool[n_hand_seeds - 1];  // constant a_min fallback
    out.accelerations = chosen.a;
    out.objective_value = chosen.eval.objective;
    out.feasible = have_winner;
    out.suboptimal = have_winner && chosen.from_backoff;
    out.predicted_states.resize(horizon + 1);
    for (int t = 0; t <= horizon; ++t)
        out.predicted_states[t] =
            ScenarioState{chosen.eval.ego[t], pb.leader[t], pb.follower[t]};
    return out;
}

GateResult gate_and_step(const ControllerConfig& config, const ErrorModel& error_model,
                         const IdmParams& idm, const ScenarioState& current) {
    validate(config);
    validate(idm);
    if (current.ego.velocity > config.v_threshold) {
        const PlannedTrajectory planned = plan(config, error_model, idm, current);
        return GateResult{planned.accelerations.front(), true, planned.feasible};
    }
    const IdmResult nominal =
        idm_acceleration(idm, current.ego.velocity, current.ego.position,
                         current.preceding.velocity, current.preceding.position,
                         config.follower_max_decel);
    return GateResult{clamp(nominal.accel, config.a_min, config.a_max), false, true};
}

}  // namespace trfc
