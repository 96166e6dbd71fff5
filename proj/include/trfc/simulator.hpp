#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "trfc/controller.hpp"
#include "trfc/estimator.hpp"
#include "trfc/tire_model.hpp"
#include "trfc/trace.hpp"
#include "trfc/vehicle_dynamics.hpp"

namespace trfc {

/// Complete description of one closed-loop scenario: ego between a worst-case
/// braking leader and an IDM follower, plus the estimation settings used to
/// close the loop on the produced logs.
struct ScenarioConfig {
    TireParams ground_truth_tire;
    VehicleParams vehicle;
    ControllerConfig controller;
    IdmParams idm;
    ErrorModel error_model;
    EstimatorConfig estimator;
    ScenarioState initial{{0.0, 15.0}, {30.0, 20.0}, {-30.0, 15.0}};
    double duration = 15.0;          ///< s, > 0
    double sensor_noise_std = 0.02;  ///< friction units, >= 0, on normalized force
    std::uint64_t random_seed = 42;
    int n_runs = 1;                  ///< repeated-run count used by the CLI
    std::string location_id = "sim-location";
    bool excitation_enabled = true;  ///< false: nominal IDM following only (baseline)
};

void validate(const ScenarioConfig& config);

/// One logged simulation step; state refers to the step start.
struct LogRecord {
    double time = 0.0;
    ScenarioState state;
    double applied_accel = 0.0;    ///< m/s^2, commanded by the controller
    double accel_real = 0.0;       ///< m/s^2, realized by the tire model
    double accel_measured = 0.0;   ///< m/s^2, accel_real plus sensor noise
    double wheel_speed_front = 0.0;  ///< rad/s
    double wheel_speed_rear = 0.0;   ///< rad/s
    double slip_front = 0.0;
    double slip_rear = 0.0;
    double force_front_noisy = 0.0;  ///< normalized, consistent with accel_measured
    double force_rear_noisy = 0.0;
    double force_front_clean = 0.0;  ///< normalized, consistent with accel_real
    double force_rear_clean = 0.0;
    bool excitation_active = false;
    bool plan_feasible = true;
};

struct SimulationLog {
    std::vector<LogRecord> records;
    bool collision = false;
    double collision_time = 0.0;  ///< meaningful only when collision is true
    std::string generator_id;     ///< random-stream identifier for reproducibility
    std::uint64_t seed = 0;
};

/// Portable Gaussian stream: Box-Muller over the standard 64-bit Mersenne
/// Twister, so identical seeds give identical draws on every platform.
class GaussianSampler {
public:
    static constexpr const char* kGeneratorId = "mt19937_64/box-muller";

    explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

    double operator()();

private:
    double uniform();  // [0, 1) from the top 53 bits

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Runs one closed-loop scenario. Deterministic given the config (the seed
/// fixes the noise stream). Stops early at a collision, defined with the same
/// gap margin the controller enforces, so a collision-free log certifies the
/// ordering constraint held throughout.
/// @throws FixedPointError if the ego force balance fails to converge; the
///         log produced so far is lost to the caller, so the CLI treats this
///         as a runtime error.
SimulationLog run_scenario(const ScenarioConfig& config);

/// Maps a log to the shared trace schema (time, wheel speeds, vehicle speed,
/// measured acceleration).
std::vector<TraceRecord> to_trace_records(const SimulationLog& log);

/// The single estimation path: log -> trace records -> samples -> sliding
/// window fits. The CLI replay of an exported trace goes through the same
/// functions, so in-process and replayed estimates agree exactly.
std::vector<TrfcEstimate> estimate_from_log(const SimulationLog& log,
                                            const ScenarioConfig& config);

/// The bias reference used by bin statistics: the configured reference peak
/// when set, else the ground-truth tire's peak.
double reference_peak_for(const ScenarioConfig& config);

struct RunOutputs {
    int run_index = 0;  ///< original run number; seeds as base_seed + run_index
    SimulationLog log;
    std::vector<TrfcEstimate> estimates;
    std::vector<BinStats> bin_stats;
};

struct RepeatedResult {
    std::vector<RunOutputs> runs;          ///< successful runs, in run order
    std::vector<std::string> run_errors;   ///< diagnostics for skipped runs
    LocationEstimate location;
};

/// Repeats the scenario with seeds base_seed + run_index, estimates each log,
/// and aggregates every (run, slip-bin) observation with a defined positive
/// std into one location estimate. Failed runs are skipped and reported.
/// @throws std::runtime_error when no run yields an aggregatable observation.
RepeatedResult run_repeated(const ScenarioConfig& config, int n_runs,
                            const std::string& location_id);

}  // namespace trfc
