#pragma once

#include <vector>

#include "trfc/estimator.hpp"
#include "trfc/vehicle_dynamics.hpp"

namespace trfc {

/// One row of the sensor trace: the shared schema for simulated and recorded
/// drives, so both flow through a single estimation path.
struct TraceRecord {
    double time_s = 0.0;
    double wheel_speed_front_rad_s = 0.0;
    double wheel_speed_rear_rad_s = 0.0;
    double vehicle_speed_m_s = 0.0;
    double longitudinal_accel_m_s2 = 0.0;
};

/// Converts a trace into fit-ready samples: per record, slip ratios for both
/// axles and the normalized traction force backed out of the longitudinal
/// force balance on a flat road (drag added back, gravity normalized). Each
/// record yields two samples, front axle then rear, sharing the measured
/// force and |accel| context. Slip ratios are clamped to [-1, 1].
/// @throws std::invalid_argument on non-finite fields or non-increasing time,
///         naming the offending row.
std::vector<SlipForceSample> samples_from_trace(const std::vector<TraceRecord>& records,
                                                const VehicleParams& vehicle,
                                                double slip_epsilon = 0.1);

}  // namespace trfc
