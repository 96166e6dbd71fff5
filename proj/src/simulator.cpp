#include "trfc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace trfc {

double GaussianSampler::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double GaussianSampler::operator()() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

void validate(const ScenarioConfig& config) {
    validate(config.ground_truth_tire);
    validate(config.vehicle);
    validate(config.controller);
    validate(config.idm);
    validate(config.error_model);
    validate(config.initial);
    if (!(std::isfinite(config.duration) && config.duration > 0.0))
        throw std::invalid_argument("ScenarioConfig: duration must be > 0");
    if (!(std::isfinite(config.sensor_noise_std) && config.sensor_noise_std >= 0.0))
        throw std::invalid_argument("ScenarioConfig: sensor_noise_std must be >= 0");
    if (config.n_runs < 1)
        throw std::invalid_argument("ScenarioConfig: n_runs must be >= 1");
    if (config.location_id.empty())
        throw std::invalid_argument("ScenarioConfig: location_id must be non-empty");
    if (config.estimator.window < 1)
        throw std::invalid_argument("ScenarioConfig: estimator window must be >= 1");
    if (!(config.estimator.fixed_b > 0.0))
        throw std::invalid_argument("ScenarioConfig: estimator fixed_b must be > 0");
    if (!(config.estimator.slip_epsilon > 0.0))
        throw std::invalid_argument("ScenarioConfig: estimator slip_epsilon must be > 0");
    if (config.estimator.reference_peak && !std::isfinite(*config.estimator.reference_peak))
        throw std::invalid_argument("ScenarioConfig: reference_peak must be finite when set");
}

SimulationLog run_scenario(const ScenarioConfig& config) {
    validate(config);
    const double dt = config.controller.dt;
    const long long steps = std::max<long long>(1, std::llround(config.duration / dt));

    SimulationLog log;
    log.generator_id = GaussianSampler::kGeneratorId;
    log.seed = config.random_seed;
    log.records.reserve(static_cast<std::size_t>(steps));

    GaussianSampler noise(config.random_seed);
    ControllerConfig ctrl = config.controller;  // prev_accel evolves across steps
    ScenarioState state = config.initial;
    double warm_accel = 0.0;
    const double margin = ctrl.ordering_margin;

    const auto gaps_open = [&](const ScenarioState& s) {
        return (s.preceding.position - s.ego.position) > margin &&
               (s.ego.position - s.following.position) > margin;
    };
    if (!gaps_open(state)) {
        log.collision = true;
        log.collision_time = 0.0;
        return log;
    }

    for (long long t = 0; t < steps; ++t) {
        const double now = static_cast<double>(t) * dt;

        GateResult control;
        if (config.excitation_enabled) {
            control = gate_and_step(ctrl, config.error_model, config.idm, state);
        } else {
            const IdmResult nominal = idm_acceleration(
                config.idm, state.ego.velocity, state.ego.position,
                state.preceding.velocity, state.preceding.position, ctrl.follower_max_decel);
            control = GateResult{std::clamp(nominal.accel, ctrl.a_min, ctrl.a_max), false, true};
        }

        // Realize the commanded acceleration as a wheel slip. Braking slip
        // saturates at wheel lock so wheel speeds stay non-negative; a
        // stopped vehicle cannot brake-slip at all.
        double slip = 0.0;
        if (!(state.ego.velocity == 0.0 && control.accel <= 0.0)) {
            slip = slip_for_acceleration(config.vehicle, config.ground_truth_tire,
                                         state.ego.velocity, control.accel, 0.0);
            const double lock_slip =
                -state.ego.velocity /
                std::max(state.ego.velocity, config.estimator.slip_epsilon);
            slip = std::max(slip, lock_slip);
        }
        const double denom = std::max(state.ego.velocity, config.estimator.slip_epsilon);
        const double wheel_speed =
            (state.ego.velocity + slip * denom) / config.vehicle.rolling_radius;

        VehicleState ego_state;
        ego_state.position = state.ego.position;
        ego_state.velocity = state.ego.velocity;
        ego_state.acceleration = warm_accel;
        ego_state.wheel_angular_velocity_front = wheel_speed;
        ego_state.wheel_angular_velocity_rear = wheel_speed;
        const double accel_real =
            net_acceleration(config.vehicle, config.ground_truth_tire, ego_state, 0.0,
                             config.estimator.slip_epsilon);

        // Single-IMU sensor model: the noise draw on normalized force shows
        // up in the measured acceleration scaled by g, so the trace replay
        // recovers exactly force_clean + draw.
        const double draw = noise() * config.sensor_noise_std;
        const double accel_measured = accel_real + draw * config.vehicle.gravity;
        const double weight = config.vehicle.mass * config.vehicle.gravity;
        const double drag = drag_force(config.vehicle, state.ego.velocity);
        const double force_clean = (config.vehicle.mass * accel_real + drag) / weight;
        const double force_noisy = (config.vehicle.mass * accel_measured + drag) / weight;

        LogRecord record;
        record.time = now;
        record.state = state;
        record.applied_accel = control.accel;
        record.accel_real = accel_real;
        record.accel_measured = accel_measured;
        record.wheel_speed_front = wheel_speed;
        record.wheel_speed_rear = wheel_speed;
        record.slip_front = slip;
        record.slip_rear = slip;
        record.force_front_noisy = force_noisy;
        record.force_rear_noisy = force_noisy;
        record.force_front_clean = force_clean;
        record.force_rear_clean = force_clean;
        record.excitation_active = control.excitation_active;
        record.plan_feasible = control.feasible;
        log.records.push_back(record);

        // Advance all three vehicles from the time-t states.
        const VehicleState next_ego =
            step(config.vehicle, config.ground_truth_tire, ego_state, slip, 0.0, dt,
                 config.estimator.slip_epsilon);
        const double leader_v =
            std::max(state.preceding.velocity - ctrl.preceding_max_decel * dt, 0.0);
        const double leader_x =
            state.preceding.position + (state.preceding.velocity + leader_v) * dt / 2.0;
        const IdmResult follower_idm = idm_acceleration(
            config.idm, state.following.velocity, state.following.position,
            state.ego.velocity, state.ego.position, ctrl.follower_max_decel);
        const double follower_accel = std::max(follower_idm.accel, -ctrl.follower_max_decel);
        const double follower_v =
            std::max(state.following.velocity + follower_accel * dt, 0.0);
        const double follower_x =
            state.following.position + (state.following.velocity + follower_v) * dt / 2.0;

        state.ego = {next_ego.position, next_ego.velocity};
        state.preceding = {leader_x, leader_v};
        state.following = {follower_x, follower_v};
        warm_accel = accel_real;
        ctrl.prev_accel = control.accel;

        if (!gaps_open(state)) {
            log.collision = true;
            log.collision_time = static_cast<double>(t + 1) * dt;
            break;
        }
    }
    return log;
}

std::vector<TraceRecord> to_trace_records(const SimulationLog& log) {
    std::vector<TraceRecord> out;
    out.reserve(log.records.size());
    for (const auto& rec : log.records)
        out.push_back(TraceRecord{rec.time, rec.wheel_speed_front, rec.wheel_speed_rear,
                                  rec.state.ego.velocity, rec.accel_measured});
    return out;
}

std::vector<TrfcEstimate> estimate_from_log(const SimulationLog& log,
                                            const ScenarioConfig& config) {
    const std::vector<TraceRecord> records = to_trace_records(log);
    const std::vector<SlipForceSample> samples =
        samples_from_trace(records, config.vehicle, config.estimator.slip_epsilon);
    return estimate_series(samples, config.estimator);
}

double reference_peak_for(const ScenarioConfig& config) {
    if (config.estimator.reference_peak) return *config.estimator.reference_peak;
    return peak_trfc(config.ground_truth_tire).value;
}

RepeatedResult run_repeated(const ScenarioConfig& config, int n_runs,
                            const std::string& location_id) {
    if (n_runs < 1) throw std::invalid_argument("run_repeated: n_runs must be >= 1");
    validate(config);

    RepeatedResult result;
    const double reference = reference_peak_for(config);
    std::vector<Observation> observations;
    for (int k = 0; k < n_runs; ++k) {
        ScenarioConfig run_config = config;
        run_config.random_seed = config.random_seed + static_cast<std::uint64_t>(k);
        try {
            RunOutputs run;
            run.run_index = k;
            run.log = run_scenario(run_config);
            run.estimates = estimate_from_log(run.log, run_config);
            run.bin_stats = bin_statistics(run.estimates, reference);
            const std::vector<Observation> obs = observations_from_bins(run.bin_stats);
            observations.insert(observations.end(), obs.begin(), obs.end());
            result.runs.push_back(std::move(run));
        } catch (const std::exception& err) {
            result.run_errors.push_back("run " + std::to_string(k) + ": " + err.what());
        }
    }
    if (observations.empty())
        throw std::runtime_error(
            "run_repeated: no aggregatable slip-bin observations across runs");
    result.location = aggregate_location(observations, location_id);
    return result;
}

}  // namespace trfc
