#include "trfc/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>

namespace trfc::csv {

namespace {

const std::vector<std::string> kTraceHeader = {"time_s", "wheel_speed_front_rad_s",
                                               "wheel_speed_rear_rad_s", "vehicle_speed_m_s",
                                               "longitudinal_accel_m_s2"};
const std::vector<std::string> kEstimateHeader = {"time_s",   "slip_bin", "peak_trfc",
                                                  "fitted_C", "fitted_D", "accel_context"};
const std::vector<std::string> kBinStatsHeader = {"bin_index", "count", "mean", "std", "mse"};
const std::vector<std::string> kObservationHeader = {"mean", "std"};
const std::vector<std::string> kErrorPairHeader = {"accel_m_s2", "observed_error"};
const std::vector<std::string> kPlotHeader = {"time_s", "x_P", "x_ego", "x_F",
                                              "v_P",    "v_ego", "v_F",  "a_ego"};

std::string trim(const std::string& s) {
    const auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    std::size_t b = 0, e = s.size();
    while (b < e && space(s[b])) ++b;
    while (e > b && space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += ",";
        out += parts[i];
    }
    return out;
}

void check_header(const std::vector<std::string>& found,
                  const std::vector<std::string>& expected, const std::string& what) {
    if (found == expected) return;
    std::vector<std::string> missing, extra;
    for (const auto& col : expected)
        if (std::find(found.begin(), found.end(), col) == found.end()) missing.push_back(col);
    for (const auto& col : found)
        if (std::find(expected.begin(), expected.end(), col) == expected.end())
            extra.push_back(col);
    std::string msg = what + " header mismatch;";
    if (!missing.empty()) msg += " missing column(s): " + join(missing) + ";";
    if (!extra.empty()) msg += " unexpected column(s): " + join(extra) + ";";
    if (missing.empty() && extra.empty()) msg += " columns out of order;";
    msg += " expected: " + join(expected);
    throw CsvError("SCHEMA", msg);
}

std::vector<std::string> read_lines(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!trim(line).empty()) lines.push_back(line);
    return lines;
}

double parse_double_field(const std::string& field, std::size_t row, const std::string& column) {
    if (field.empty())
        throw CsvError("PARSE", "row " + std::to_string(row) + ": empty " + column + " field");
    double value{};
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), last, value);
    if (ec != std::errc() || ptr != last)
        throw CsvError("PARSE", "row " + std::to_string(row) + ": cannot parse " + column +
                                    " value '" + field + "'");
    return value;
}

long long parse_int_field(const std::string& field, std::size_t row, const std::string& column) {
    if (field.empty())
        throw CsvError("PARSE", "row " + std::to_string(row) + ": empty " + column + " field");
    long long value{};
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), last, value);
    if (ec != std::errc() || ptr != last)
        throw CsvError("PARSE", "row " + std::to_string(row) + ": cannot parse " + column +
                                    " value '" + field + "'");
    return value;
}

void require_field_count(const std::vector<std::string>& fields, std::size_t expected,
                         std::size_t row) {
    if (fields.size() != expected)
        throw CsvError("PARSE", "row " + std::to_string(row) + ": expected " +
                                    std::to_string(expected) + " fields, found " +
                                    std::to_string(fields.size()));
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, static_cast<std::size_t>(ptr - buf));
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
    out << join(kTraceHeader) << '\n';
    for (const auto& rec : records)
        out << format_double(rec.time_s) << ',' << format_double(rec.wheel_speed_front_rad_s)
            << ',' << format_double(rec.wheel_speed_rear_rad_s) << ','
            << format_double(rec.vehicle_speed_m_s) << ','
            << format_double(rec.longitudinal_accel_m_s2) << '\n';
}

std::vector<TraceRecord> read_trace(std::istream& in) {
    const std::vector<std::string> lines = read_lines(in);
    if (lines.empty()) throw CsvError("SCHEMA", "empty file: missing trace header");
    check_header(split_line(lines[0]), kTraceHeader, "trace");
    std::vector<TraceRecord> out;
    out.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::vector<std::string> fields = split_line(lines[i]);
        require_field_count(fields, kTraceHeader.size(), i);
        TraceRecord rec;
        rec.time_s = parse_double_field(fields[0], i, kTraceHeader[0]);
        rec.wheel_speed_front_rad_s = parse_double_field(fields[1], i, kTraceHeader[1]);
        rec.wheel_speed_rear_rad_s = parse_double_field(fields[2], i, kTraceHeader[2]);
        rec.vehicle_speed_m_s = parse_double_field(fields[3], i, kTraceHeader[3]);
        rec.longitudinal_accel_m_s2 = parse_double_field(fields[4], i, kTraceHeader[4]);
        out.push_back(rec);
    }
    return out;
}

void write_estimates(std::ostream& out, const std::vector<TrfcEstimate>& estimates) {
    out << join(kEstimateHeader) << '\n';
    for (const auto& est : estimates) {
        out << format_double(est.time) << ',';
        if (est.slip_bin) out << *est.slip_bin;
        out << ',' << format_double(est.peak_trfc) << ',' << format_double(est.fitted_c)
            << ',' << format_double(est.fitted_d) << ',' << format_double(est.accel_context)
            << '\n';
    }
}

void write_bin_stats(std::ostream& out, const std::vector<BinStats>& bins) {
    out << join(kBinStatsHeader) << '\n';
    for (const auto& stats : bins) {
        out << stats.bin_index << ',' << stats.count << ',' << format_double(stats.mean)
            << ',';
        if (stats.std_dev) out << format_double(*stats.std_dev);
        out << ',' << format_double(stats.mse_vs_reference) << '\n';
    }
}

std::vector<ErrorObservation> read_error_observations(std::istream& in) {
    const std::vector<std::string> lines = read_lines(in);
    if (lines.empty()) throw CsvError("SCHEMA", "empty file: missing header");
    check_header(split_line(lines[0]), kErrorPairHeader, "error-observation");
    std::vector<ErrorObservation> out;
    out.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::vector<std::string> fields = split_line(lines[i]);
        require_field_count(fields, kErrorPairHeader.size(), i);
        ErrorObservation obs;
        obs.accel_magnitude = parse_double_field(fields[0], i, kErrorPairHeader[0]);
        obs.observed_error = parse_double_field(fields[1], i, kErrorPairHeader[1]);
        out.push_back(obs);
    }
    return out;
}

AggregationInput read_aggregation_input(std::istream& in) {
    const std::vector<std::string> lines = read_lines(in);
    if (lines.empty()) throw CsvError("SCHEMA", "empty file: missing header");
    const std::vector<std::string> header = split_line(lines[0]);
    AggregationInput result;

    if (header == kObservationHeader) {
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const std::vector<std::string> fields = split_line(lines[i]);
            require_field_count(fields, kObservationHeader.size(), i);
            Observation obs;
            obs.mean = parse_double_field(fields[0], i, "mean");
            obs.std_dev = parse_double_field(fields[1], i, "std");
            if (!(obs.std_dev > 0.0) || !std::isfinite(obs.std_dev))
                throw CsvError("DATA", "row " + std::to_string(i) + ": std must be > 0, got " +
                                           fields[1]);
            result.observations.push_back(obs);
        }
        return result;
    }
    if (header == kBinStatsHeader) {
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const std::vector<std::string> fields = split_line(lines[i]);
            require_field_count(fields, kBinStatsHeader.size(), i);
            parse_int_field(fields[0], i, "bin_index");
            parse_int_field(fields[1], i, "count");
            const double mean = parse_double_field(fields[2], i, "mean");
            if (fields[3].empty()) {
                result.warnings.push_back("row " + std::to_string(i) +
                                          ": undefined std, skipped");
                continue;
            }
            const double std_dev = parse_double_field(fields[3], i, "std");
            if (!(std_dev > 0.0) || !std::isfinite(std_dev))
                throw CsvError("DATA", "row " + std::to_string(i) + ": std must be > 0, got " +
                                           fields[3]);
            result.observations.push_back(Observation{mean, std_dev});
        }
        return result;
    }
    throw CsvError("SCHEMA", "header matches neither '" + join(kObservationHeader) +
                                 "' nor '" + join(kBinStatsHeader) + "'; found: " +
                                 join(header));
}

void write_plot_series(std::ostream& out, const SimulationLog& log) {
    out << join(kPlotHeader) << '\n';
    for (const auto& rec : log.records)
        out << format_double(rec.time) << ',' << format_double(rec.state.preceding.position)
            << ',' << format_double(rec.state.ego.position) << ','
            << format_double(rec.state.following.position) << ','
            << format_double(rec.state.preceding.velocity) << ','
            << format_double(rec.state.ego.velocity) << ','
            << format_double(rec.state.following.velocity) << ','
            << format_double(rec.accel_real) << '\n';
}

}  // namespace trfc::csv
