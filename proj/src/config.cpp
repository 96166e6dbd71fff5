#include "trfc/config.hpp"

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <utility>

#include <json.hpp>

#include "trfc/controller.hpp"
#include "trfc/tire_model.hpp"

namespace trfc::config {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& err) {
        throw ConfigError("malformed config " + path + ": " + err.what());
    }
}

// Typed, fail-closed view over one JSON object: every getter claims its key,
// and finish() rejects whatever was never claimed.
class Section {
public:
    Section(const json& node, std::string path) : node_(&node), path_(std::move(path)) {
        if (!node_->is_object()) throw ConfigError(path_ + ": must be an object");
    }

    void number(const char* key, double& target) {
        if (const json* v = claim(key)) {
            if (!v->is_number()) throw ConfigError(where(key) + ": must be a number");
            target = v->get<double>();
        }
    }

    void optional_number(const char* key, std::optional<double>& target) {
        if (const json* v = claim(key)) {
            if (v->is_null()) {
                target.reset();
                return;
            }
            if (!v->is_number()) throw ConfigError(where(key) + ": must be a number or null");
            target = v->get<double>();
        }
    }

    void integer(const char* key, int& target) {
        if (const json* v = claim(key)) {
            if (!v->is_number_integer())
                throw ConfigError(where(key) + ": must be an integer");
            target = v->get<int>();
        }
    }

    void unsigned64(const char* key, std::uint64_t& target) {
        if (const json* v = claim(key)) {
            const bool ok = v->is_number_unsigned() ||
                            (v->is_number_integer() && v->get<long long>() >= 0);
            if (!ok) throw ConfigError(where(key) + ": must be a non-negative integer");
            target = v->get<std::uint64_t>();
        }
    }

    void size_field(const char* key, std::size_t& target) {
        std::uint64_t value = target;
        unsigned64(key, value);
        target = static_cast<std::size_t>(value);
    }

    void boolean(const char* key, bool& target) {
        if (const json* v = claim(key)) {
            if (!v->is_boolean()) throw ConfigError(where(key) + ": must be a boolean");
            target = v->get<bool>();
        }
    }

    void text(const char* key, std::string& target) {
        if (const json* v = claim(key)) {
            if (!v->is_string()) throw ConfigError(where(key) + ": must be a string");
            target = v->get<std::string>();
        }
    }

    const json* subsection(const char* key) { return claim(key); }

    void finish() const {
        for (const auto& item : node_->items())
            if (!consumed_.count(item.key()))
                throw ConfigError(path_ + "." + item.key() + ": unknown key");
    }

    std::string where(const char* key) const { return path_ + "." + key; }

private:
    const json* claim(const char* key) {
        consumed_.insert(key);
        const auto it = node_->find(key);
        return it == node_->end() ? nullptr : &*it;
    }

    const json* node_;
    std::string path_;
    std::set<std::string> consumed_;
};

void load_tire(const json& node, const std::string& path, TireParams& tire) {
    Section s(node, path);
    s.number("stiffness_b", tire.stiffness_b);
    s.number("shape_c", tire.shape_c);
    s.number("peak_d", tire.peak_d);
    s.number("curvature_e", tire.curvature_e);
    s.finish();
}

void load_vehicle(const json& node, const std::string& path, VehicleParams& vehicle) {
    Section s(node, path);
    s.number("mass_kg", vehicle.mass);
    s.number("cg_to_front_axle_m", vehicle.cg_to_front_axle);
    s.number("cg_to_rear_axle_m", vehicle.cg_to_rear_axle);
    s.number("cg_height_m", vehicle.cg_height);
    s.number("air_density_kg_m3", vehicle.air_density);
    s.number("drag_coefficient", vehicle.drag_coefficient);
    s.number("frontal_area_m2", vehicle.frontal_area);
    s.number("rolling_radius_m", vehicle.rolling_radius);
    s.number("gravity_m_s2", vehicle.gravity);
    s.finish();
}

void load_controller(const json& node, const std::string& path, ControllerConfig& ctrl) {
    Section s(node, path);
    s.integer("horizon_steps", ctrl.horizon_steps);
    s.number("dt_s", ctrl.dt);
    s.number("a_min_m_s2", ctrl.a_min);
    s.number("a_max_m_s2", ctrl.a_max);
    s.number("preceding_max_decel_m_s2", ctrl.preceding_max_decel);
    s.number("follower_max_decel_m_s2", ctrl.follower_max_decel);
    s.number("lambda", ctrl.lambda);
    s.number("v_threshold_m_s", ctrl.v_threshold);
    s.number("ordering_margin_m", ctrl.ordering_margin);
    s.number("oscillation_sign", ctrl.oscillation_sign);
    s.finish();
}

void load_idm(const json& node, const std::string& path, IdmParams& idm) {
    Section s(node, path);
    s.number("desired_speed_m_s", idm.desired_speed);
    s.number("time_headway_s", idm.time_headway);
    s.number("min_gap_m", idm.min_gap);
    s.number("comfort_accel_m_s2", idm.comfort_accel);
    s.number("comfort_decel_m_s2", idm.comfort_decel);
    s.number("accel_exponent", idm.accel_exponent);
    s.number("vehicle_length_m", idm.vehicle_length);
    s.finish();
}

void load_error_model_node(const json& node, const std::string& path, ErrorModel& model) {
    Section s(node, path);
    s.number("amplitude", model.amplitude);
    s.number("width_m_s2", model.width);
    s.number("floor", model.floor);
    s.boolean("degenerate", model.degenerate);
    s.finish();
}

void load_estimator(const json& node, const std::string& path, EstimatorConfig& est) {
    Section s(node, path);
    s.number("fixed_b", est.fixed_b);
    s.number("c_lower", est.c_bounds.lower);
    s.number("c_upper", est.c_bounds.upper);
    s.number("d_lower", est.d_bounds.lower);
    s.number("d_upper", est.d_bounds.upper);
    s.integer("window_samples", est.window);
    s.number("slip_epsilon_m_s", est.slip_epsilon);
    s.optional_number("reference_peak_trfc", est.reference_peak);
    s.finish();
}

void load_initial(const json& node, const std::string& path, ScenarioState& initial) {
    Section s(node, path);
    s.number("ego_position_m", initial.ego.position);
    s.number("ego_velocity_m_s", initial.ego.velocity);
    s.number("preceding_position_m", initial.preceding.position);
    s.number("preceding_velocity_m_s", initial.preceding.velocity);
    s.number("following_position_m", initial.following.position);
    s.number("following_velocity_m_s", initial.following.velocity);
    s.finish();
}

}  // namespace

ScenarioConfig load_scenario(const std::string& path) {
    const json root = parse_file(path);
    ScenarioConfig cfg;
    Section s(root, "config");
    if (const json* node = s.subsection("tire")) load_tire(*node, "config.tire", cfg.ground_truth_tire);
    if (const json* node = s.subsection("vehicle"))
        load_vehicle(*node, "config.vehicle", cfg.vehicle);
    if (const json* node = s.subsection("controller"))
        load_controller(*node, "config.controller", cfg.controller);
    if (const json* node = s.subsection("idm")) load_idm(*node, "config.idm", cfg.idm);
    if (const json* node = s.subsection("error_model"))
        load_error_model_node(*node, "config.error_model", cfg.error_model);
    if (const json* node = s.subsection("estimator"))
        load_estimator(*node, "config.estimator", cfg.estimator);
    if (const json* node = s.subsection("initial"))
        load_initial(*node, "config.initial", cfg.initial);
    s.number("duration_s", cfg.duration);
    s.number("sensor_noise_std", cfg.sensor_noise_std);
    s.unsigned64("random_seed", cfg.random_seed);
    s.integer("n_runs", cfg.n_runs);
    s.text("location_id", cfg.location_id);
    s.boolean("excitation_enabled", cfg.excitation_enabled);
    s.finish();
    return cfg;
}

EstimateConfig load_estimate_config(const std::string& path) {
    const json root = parse_file(path);
    EstimateConfig cfg;
    Section s(root, "config");
    if (const json* node = s.subsection("vehicle"))
        load_vehicle(*node, "config.vehicle", cfg.vehicle);
    if (const json* node = s.subsection("estimator"))
        load_estimator(*node, "config.estimator", cfg.estimator);
    s.finish();
    return cfg;
}

ErrorModel load_error_model(const std::string& path) {
    const json root = parse_file(path);
    ErrorModel model;
    load_error_model_node(root, "error_model", model);
    validate(model);
    return model;
}

void save_error_model(const std::string& path, const ErrorModel& model) {
    json out{{"amplitude", model.amplitude},
             {"width_m_s2", model.width},
             {"floor", model.floor},
             {"degenerate", model.degenerate}};
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write " + path);
    file << out.dump(2) << '\n';
    if (!file.good()) throw std::runtime_error("write failed: " + path);
}

void save_location_estimate(const std::string& path, const LocationEstimate& estimate) {
    json out{{"location_id", estimate.location_id},
             {"mean", estimate.mean},
             {"variance", estimate.variance},
             {"n_observations", estimate.n_observations}};
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write " + path);
    file << out.dump(2) << '\n';
    if (!file.good()) throw std::runtime_error("write failed: " + path);
}

LocationEstimate load_location_estimate(const std::string& path) {
    const json root = parse_file(path);
    LocationEstimate estimate;
    Section s(root, "location_estimate");
    s.text("location_id", estimate.location_id);
    s.number("mean", estimate.mean);
    s.number("variance", estimate.variance);
    s.size_field("n_observations", estimate.n_observations);
    s.finish();
    return estimate;
}

}  // namespace trfc::config
