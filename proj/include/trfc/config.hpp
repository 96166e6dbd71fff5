#pragma once

#include <stdexcept>
#include <string>

#include "trfc/estimator.hpp"
#include "trfc/simulator.hpp"
#include "trfc/vehicle_dynamics.hpp"

namespace trfc::config {

/// Configuration file problem: unreadable file, malformed JSON (message keeps
/// the parser's line/column diagnostic), unknown key, or a wrongly typed
/// value. Every message names the offending field path.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

/// Loads a full scenario description. Every key is optional and falls back to
/// the built-in default; unknown keys are rejected so typos in physical
/// parameters cannot slip through.
ScenarioConfig load_scenario(const std::string& path);

/// Vehicle and estimation settings for offline trace replay.
struct EstimateConfig {
    VehicleParams vehicle;
    EstimatorConfig estimator;
};

EstimateConfig load_estimate_config(const std::string& path);

ErrorModel load_error_model(const std::string& path);
void save_error_model(const std::string& path, const ErrorModel& model);

void save_location_estimate(const std::string& path, const LocationEstimate& estimate);
LocationEstimate load_location_estimate(const std::string& path);

}  // namespace trfc::config
