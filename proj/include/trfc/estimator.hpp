#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trfc/tire_model.hpp"

namespace trfc {

/// One measured (slip, normalized force) point with its acceleration context.
struct SlipForceSample {
    double time = 0.0;              ///< s
    double slip_ratio = 0.0;        ///< dimensionless, [-1, 1]
    double normalized_force = 0.0;  ///< measured longitudinal force / normal load
    double accel_context = 0.0;     ///< m/s^2, |a| at collection time
};

/// Result of one windowed peak-TRFC fit.
struct TrfcEstimate {
    double time = 0.0;
    double peak_trfc = 0.0;
    std::optional<int> slip_bin;    ///< bin over |kappa| in [0.01, 0.30); empty outside
    double fitted_c = 0.0;
    double fitted_d = 0.0;
    double accel_context = 0.0;
};

/// Per-bin summary. std uses the population divisor so the bias-variance
/// decomposition is an exact identity; it is undefined below two samples
/// (reported, never dropped).
struct BinStats {
    int bin_index = 0;
    std::size_t count = 0;
    double mean = 0.0;
    std::optional<double> std_dev;
    double mse_vs_reference = 0.0;  ///< NaN when no reference is configured
};

/// Acceleration-to-expected-error map e(a) = floor + amplitude * exp(-a^2 / (2 width^2)).
struct ErrorModel {
    double amplitude = 0.3;  ///< >= 0
    double width = 2.0;      ///< m/s^2, > 0
    double floor = 0.02;     ///< >= 0
    bool degenerate = false; ///< set by fit_error_model on flat input data
};

void validate(const ErrorModel& model);

/// One independent observation entering spatial aggregation.
struct Observation {
    double mean = 0.0;
    double std_dev = 0.0;  ///< > 0
};

/// Inverse-variance aggregate of all observations at one location.
struct LocationEstimate {
    std::string location_id;
    double mean = 0.0;
    double variance = 0.0;
    std::size_t n_observations = 0;
};

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Estimation pipeline settings shared by the simulator and the replay path.
struct EstimatorConfig {
    double fixed_b = 10.0;                    ///< stiffness factor held fixed during fits
    Interval c_bounds{1.9, 2.3};
    Interval d_bounds{1e-3, 1.3};
    int window = 10;                          ///< samples per sliding fit window
    double slip_epsilon = 0.1;                ///< m/s, slip-ratio denominator floor
    std::optional<double> reference_peak;     ///< bias reference; ground truth in simulation
};

struct FitResult {
    double fitted_c = 0.0;
    double fitted_d = 0.0;
    double peak_trfc = 0.0;
    double objective = 0.0;  ///< residual sum of squares at the optimum
};

/// Bounded least-squares fit of (C, D) with fixed B over one sample window.
/// Multi-start local descent; the lowest-objective start wins, ties broken by
/// start order.
/// @throws std::invalid_argument on an empty window or invalid bounds.
/// @throws std::runtime_error if every start diverges.
FitResult fit_point(std::span<const SlipForceSample> window, double fixed_b,
                    Interval c_bounds, Interval d_bounds);

/// Half-open slip bin over |kappa| in [0.01, 0.30) at width 0.01; bin 0 covers
/// [0.01, 0.02). Out-of-range slip has no bin.
std::optional<int> assign_bin(double kappa);

/// Per-bin mean, population std, and mse = variance + bias^2 against the
/// reference peak. Bins appear in index order; single-sample bins keep an
/// undefined std.
std::vector<BinStats> bin_statistics(std::span<const TrfcEstimate> estimates,
                                     double reference_peak);

/// One (|acceleration|, observed error) pair for error-model fitting.
struct ErrorObservation {
    double accel_magnitude = 0.0;
    double observed_error = 0.0;
};

/// Least-squares fit of the Gaussian-plus-floor error model. Requires three
/// distinct acceleration magnitudes; flat data yields a degenerate flat model
/// (amplitude 0) flagged as such.
ErrorModel fit_error_model(std::span<const ErrorObservation> data);

/// floor + amplitude * exp(-accel^2 / (2 width^2)); even in accel.
double evaluate_error(const ErrorModel& model, double accel);

/// Inverse-variance weighted combination: variance = 1 / sum(1/std^2),
/// mean = variance * sum(mean/std^2).
/// @throws std::invalid_argument on empty input or any std <= 0.
LocationEstimate aggregate_location(std::span<const Observation> observations,
                                    std::string location_id);

/// Sliding-window estimation over a sample stream: each estimate fits the
/// `window` most recent samples and is anchored at the newest one (its time,
/// bin, and accel context). Emitted only once the window is full.
std::vector<TrfcEstimate> estimate_series(std::span<const SlipForceSample> samples,
                                          const EstimatorConfig& config);

/// The aggregation-ready rows of a bin-statistics table: bins with a defined,
/// strictly positive std.
std::vector<Observation> observations_from_bins(std::span<const BinStats> bins);

}  // namespace trfc
