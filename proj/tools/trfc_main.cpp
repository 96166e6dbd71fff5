#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trfc/config.hpp"
#include "trfc/csv_io.hpp"
#include "trfc/simulator.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::string single_line(std::string text) {
    for (char& c : text)
        if (c == '\n' || c == '\r') c = ' ';
    return text;
}

void diagnose(const std::string& code, const std::string& message) {
    std::cerr << "E_" << code << ": " << single_line(message) << "\n";
}

void warn(const std::string& code, const std::string& message) {
    std::cerr << "W_" << code << ": " << single_line(message) << "\n";
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw trfc::csv::CsvError("IO", "cannot open input file: " + path);
    return in;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void finish_output(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out.good()) throw std::runtime_error("write failed: " + path.string());
}

void write_run_files(const fs::path& dir, const trfc::RunOutputs& run,
                     const std::string& suffix) {
    {
        const fs::path path = dir / ("trace" + suffix + ".csv");
        std::ofstream out = open_output(path);
        trfc::csv::write_trace(out, trfc::to_trace_records(run.log));
        finish_output(out, path);
    }
    {
        const fs::path path = dir / ("bin_stats" + suffix + ".csv");
        std::ofstream out = open_output(path);
        trfc::csv::write_bin_stats(out, run.bin_stats);
        finish_output(out, path);
    }
    {
        const fs::path path = dir / ("plot_series" + suffix + ".csv");
        std::ofstream out = open_output(path);
        trfc::csv::write_plot_series(out, run.log);
        finish_output(out, path);
    }
}

int cmd_simulate(const std::string& config_path, const std::string& output_dir,
                 const std::optional<std::uint64_t>& seed) {
    trfc::ScenarioConfig config = trfc::config::load_scenario(config_path);
    if (seed) config.random_seed = *seed;
    trfc::validate(config);

    const fs::path dir(output_dir);
    fs::create_directories(dir);

    const trfc::RepeatedResult result =
        trfc::run_repeated(config, config.n_runs, config.location_id);
    for (const std::string& message : result.run_errors) warn("RUN", message);

    for (const trfc::RunOutputs& run : result.runs) {
        if (run.log.collision)
            warn("COLLISION", "run " + std::to_string(run.run_index) + ": collision at t=" +
                                  trfc::csv::format_double(run.log.collision_time) + " s");
        const std::string suffix =
            config.n_runs == 1 ? "" : "_run" + std::to_string(run.run_index);
        write_run_files(dir, run, suffix);
    }
    trfc::config::save_location_estimate((dir / "location_estimate.json").string(),
                                         result.location);

    std::cout << "location " << result.location.location_id
              << ": mean=" << trfc::csv::format_double(result.location.mean)
              << " variance=" << trfc::csv::format_double(result.location.variance)
              << " observations=" << result.location.n_observations << "\n";
    std::cout << "outputs written to " << dir.string() << "\n";
    return 0;
}

int cmd_estimate(const std::string& trace_path, const std::string& config_path,
                 const std::string& output_dir) {
    trfc::config::EstimateConfig config;
    if (!config_path.empty()) config = trfc::config::load_estimate_config(config_path);
    trfc::validate(config.vehicle);

    std::ifstream in = open_input(trace_path);
    const std::vector<trfc::TraceRecord> records = trfc::csv::read_trace(in);
    if (records.empty()) {
        diagnose("DATA", "trace has no data rows: " + trace_path);
        return kExitValidation;
    }

    const std::vector<trfc::SlipForceSample> samples =
        trfc::samples_from_trace(records, config.vehicle, config.estimator.slip_epsilon);
    const std::vector<trfc::TrfcEstimate> estimates =
        trfc::estimate_series(samples, config.estimator);

    std::size_t binned = 0;
    for (const trfc::TrfcEstimate& est : estimates)
        if (est.slip_bin) ++binned;
    if (binned == 0)
        warn("EXCITATION",
             "no estimate reached the 0.01 slip threshold; excitation was insufficient "
             "for binned statistics");

    double reference = std::numeric_limits<double>::quiet_NaN();
    if (config.estimator.reference_peak) {
        reference = *config.estimator.reference_peak;
    } else {
        warn("REFERENCE", "no reference_peak_trfc configured; mse column is nan");
    }
    const std::vector<trfc::BinStats> bins = trfc::bin_statistics(estimates, reference);

    const fs::path dir(output_dir);
    fs::create_directories(dir);
    {
        const fs::path path = dir / "estimates.csv";
        std::ofstream out = open_output(path);
        trfc::csv::write_estimates(out, estimates);
        finish_output(out, path);
    }
    {
        const fs::path path = dir / "bin_stats.csv";
        std::ofstream out = open_output(path);
        trfc::csv::write_bin_stats(out, bins);
        finish_output(out, path);
    }
    std::cout << estimates.size() << " window estimates (" << binned << " binned), "
              << bins.size() << " bins; outputs written to " << dir.string() << "\n";
    return 0;
}

int cmd_fit_error_model(const std::vector<std::string>& input_paths,
                        const std::string& output_path) {
    std::vector<trfc::ErrorObservation> observations;
    for (const std::string& path : input_paths) {
        std::ifstream in = open_input(path);
        const std::vector<trfc::ErrorObservation> rows = trfc::csv::read_error_observations(in);
        observations.insert(observations.end(), rows.begin(), rows.end());
    }
    const trfc::ErrorModel model = trfc::fit_error_model(observations);
    if (model.degenerate)
        warn("DEGENERATE", "all observed errors equal; fitted a flat model with amplitude 0");
    trfc::config::save_error_model(output_path, model);
    std::cout << "error model: amplitude=" << trfc::csv::format_double(model.amplitude)
              << " width=" << trfc::csv::format_double(model.width)
              << " floor=" << trfc::csv::format_double(model.floor) << " -> " << output_path
              << "\n";
    return 0;
}

int cmd_aggregate(const std::vector<std::string>& input_paths, const std::string& location_id,
                  const std::string& output_path) {
    std::vector<trfc::Observation> observations;
    for (const std::string& path : input_paths) {
        std::ifstream in = open_input(path);
        trfc::csv::AggregationInput parsed = trfc::csv::read_aggregation_input(in);
        for (const std::string& message : parsed.warnings) warn("DATA", path + ": " + message);
        observations.insert(observations.end(), parsed.observations.begin(),
                            parsed.observations.end());
    }
    if (observations.empty()) {
        diagnose("DATA", "no aggregatable observations in the input files");
        return kExitValidation;
    }
    const trfc::LocationEstimate estimate = trfc::aggregate_location(observations, location_id);
    trfc::config::save_location_estimate(output_path, estimate);
    std::cout << "location " << estimate.location_id
              << ": mean=" << trfc::csv::format_double(estimate.mean)
              << " variance=" << trfc::csv::format_double(estimate.variance)
              << " observations=" << estimate.n_observations << " -> " << output_path << "\n";
    return 0;
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const trfc::config::ConfigError& err) {
        diagnose("CONFIG", err.what());
        return kExitValidation;
    } catch (const trfc::csv::CsvError& err) {
        diagnose(err.code, err.what());
        return kExitValidation;
    } catch (const std::logic_error& err) {
        diagnose("VALIDATION", err.what());
        return kExitValidation;
    } catch (const std::exception& err) {
        diagnose("RUNTIME", err.what());
        return kExitRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tire-road friction estimation and slip-excitation toolkit"};
    app.require_subcommand(1);

    std::string sim_config;
    std::string sim_output_dir = ".";
    std::optional<std::uint64_t> sim_seed;
    CLI::App* simulate =
        app.add_subcommand("simulate", "Run closed-loop scenarios and estimate from the logs");
    simulate->add_option("--config", sim_config, "Scenario config JSON")->required();
    simulate->add_option("--output-dir", sim_output_dir, "Directory for output files");
    simulate->add_option("--seed", sim_seed, "Override the config's random seed");

    std::string est_trace;
    std::string est_config;
    std::string est_output_dir = ".";
    CLI::App* estimate =
        app.add_subcommand("estimate", "Replay a recorded trace through the estimator");
    estimate->add_option("--trace", est_trace, "Trace CSV to replay")->required();
    estimate->add_option("--config", est_config, "Vehicle/estimator config JSON");
    estimate->add_option("--output-dir", est_output_dir, "Directory for output files");

    std::vector<std::string> fit_inputs;
    std::string fit_output;
    CLI::App* fit = app.add_subcommand(
        "fit-error-model", "Fit the acceleration-to-error model from observation CSVs");
    fit->add_option("--input", fit_inputs, "CSV file(s) with accel_m_s2,observed_error rows")
        ->required();
    fit->add_option("--output", fit_output, "Path of the fitted model JSON")->required();

    std::vector<std::string> agg_inputs;
    std::string agg_location = "location";
    std::string agg_output;
    CLI::App* aggregate = app.add_subcommand(
        "aggregate", "Combine estimate files into one location estimate");
    aggregate->add_option("--input", agg_inputs, "CSV file(s): mean,std or bin-stats tables")
        ->required();
    aggregate->add_option("--location-id", agg_location, "Identifier for the location");
    aggregate->add_option("--output", agg_output, "Path of the aggregated JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        diagnose("USAGE", err.what());
        return kExitValidation;
    }

    return run_guarded([&]() -> int {
        if (simulate->parsed()) return cmd_simulate(sim_config, sim_output_dir, sim_seed);
        if (estimate->parsed()) return cmd_estimate(est_trace, est_config, est_output_dir);
        if (fit->parsed()) return cmd_fit_error_model(fit_inputs, fit_output);
        return cmd_aggregate(agg_inputs, agg_location, agg_output);
    });
}
