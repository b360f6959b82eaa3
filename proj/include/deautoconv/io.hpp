#pragma once

// Data ingestion and report/trace output.
//
// Input: either a CSV column (one number per line, '#' comments and blank
// lines skipped) or a JSON object {"y": [...], "x_true": [...], "name": "..."}.
// Output: a JSON run report and a plot-ready CSV trace. Every write goes to a
// temporary sibling file first and is renamed into place.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "deautoconv/experiments.hpp"
#include "deautoconv/solver.hpp"

namespace deautoconv::io {

enum class DataFormat { Auto, Csv, Json };

/// "csv" | "json" | "auto"; UsageError otherwise.
DataFormat parse_format(std::string_view name);

/// Parses a vector of finite nonnegative numbers. For JSON input the array
/// is taken from `key`. DataError with line (CSV) or index (JSON) context.
std::vector<double> parse_vector(std::string_view text, DataFormat format,
                                 std::string_view key = "y");

/// parse_vector on a file's contents; DataError if it cannot be read.
std::vector<double> read_observations(const std::filesystem::path& path,
                                      DataFormat format = DataFormat::Auto,
                                      std::string_view key = "y");

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

nlohmann::json report_json(const MultiStartResult& result, const Observations& y,
                           const SolverConfig& cfg);
nlohmann::json report_json(const RunResult& result, const Observations& y,
                           const SolverConfig& cfg);

nlohmann::json simulation_json(const SimulatedData& data);

/// Writes `content` to `path` via a temporary file and rename.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

void write_report(const nlohmann::json& report, const std::filesystem::path& path);
nlohmann::json read_report(const std::filesystem::path& path);

/// Header "t,divergence,step_div,step_l1", plus ",x0,...,xm" when the
/// records carry snapshots. UsageError on an empty trace.
std::string trace_csv(const std::vector<IterationRecord>& trace);
void write_trace(const std::vector<IterationRecord>& trace, const std::filesystem::path& path);

}  // namespace deautoconv::io
