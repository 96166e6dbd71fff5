#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "trfc/estimator.hpp"
#include "trfc/simulator.hpp"
#include "trfc/trace.hpp"

namespace trfc::csv {

/// CSV problem with a machine-parsable category: SCHEMA (wrong columns),
/// PARSE (malformed cell or row shape), DATA (well-formed but invalid value).
struct CsvError : std::runtime_error {
    CsvError(std::string code_in, const std::string& message)
        : std::runtime_error(message), code(std::move(code_in)) {}
    std::string code;
};

/// Shortest decimal form that parses back to the identical double, so every
/// CSV round trip is bit-exact.
std::string format_double(double value);

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records);

/// Strict reader for the trace schema: the header must match the five field
/// names exactly and in order; schema errors name the offending columns.
std::vector<TraceRecord> read_trace(std::istream& in);

void write_estimates(std::ostream& out, const std::vector<TrfcEstimate>& estimates);

void write_bin_stats(std::ostream& out, const std::vector<BinStats>& bins);

/// One (|accel|, observed error) point per row under the header
/// "accel_m_s2,observed_error".
std::vector<ErrorObservation> read_error_observations(std::istream& in);

struct AggregationInput {
    std::vector<Observation> observations;
    std::vector<std::string> warnings;  ///< rows skipped for an undefined std
};

/// Accepts either a bare "mean,std" table or a full bin-stats table. Rows
/// with an empty std cell are skipped with a warning; a non-positive std is
/// a DATA error naming the row.
AggregationInput read_aggregation_input(std::istream& in);

/// Time series of positions, velocities, and the ego acceleration for all
/// three vehicles, one row per simulation step.
void write_plot_series(std::ostream& out, const SimulationLog& log);

}  // namespace trfc::csv
