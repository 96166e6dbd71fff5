#include "trfc/trace.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace trfc {

std::vector<SlipForceSample> samples_from_trace(const std::vector<TraceRecord>& records,
                                                const VehicleParams& vehicle,
                                                double slip_epsilon) {
    validate(vehicle);
    if (!(slip_epsilon > 0.0))
        throw std::invalid_argument("samples_from_trace: slip_epsilon must be > 0");

    std::vector<SlipForceSample> samples;
    samples.reserve(records.size() * 2);
    double prev_time = -std::numeric_limits<double>::infinity();
    const double weight = vehicle.mass * vehicle.gravity;

    for (std::size_t i = 0; i < records.size(); ++i) {
        const TraceRecord& rec = records[i];
        const std::string row = "trace row " + std::to_string(i + 1);
        if (!std::isfinite(rec.time_s) || !std::isfinite(rec.wheel_speed_front_rad_s) ||
            !std::isfinite(rec.wheel_speed_rear_rad_s) ||
            !std::isfinite(rec.vehicle_speed_m_s) ||
            !std::isfinite(rec.longitudinal_accel_m_s2))
            throw std::invalid_argument(row + ": non-finite field");
        if (rec.vehicle_speed_m_s < 0.0)
            throw std::invalid_argument(row + ": negative vehicle speed");
        if (!(rec.time_s > prev_time))
            throw std::invalid_argument(row + ": time not strictly increasing");
        prev_time = rec.time_s;

        const double force = (vehicle.mass * rec.longitudinal_accel_m_s2 +
                              drag_force(vehicle, rec.vehicle_speed_m_s)) /
                             weight;
        const double accel_context = std::abs(rec.longitudinal_accel_m_s2);
        for (double wheel_speed :
             {rec.wheel_speed_front_rad_s, rec.wheel_speed_rear_rad_s}) {
            double kappa = slip_ratio(wheel_speed, vehicle.rolling_radius,
                                      rec.vehicle_speed_m_s, slip_epsilon);
            kappa = std::min(std::max(kappa, -1.0), 1.0);
            samples.push_back(SlipForceSample{rec.time_s, kappa, force, accel_context});
        }
    }
    return samples;
}

}  // namespace trfc
