#include "deautoconv/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "deautoconv/error.hpp"
#include "deautoconv/kernels.hpp"
#include "deautoconv/random.hpp"

namespace deautoconv::io {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void check_value(double v, const std::string& where) {
  if (!std::isfinite(v)) throw DataError(where + ": value is not finite");
  if (v < 0.0) throw DataError(where + ": negative value " + format_double(v));
}

std::vector<double> parse_csv(std::string_view text) {
  std::vector<double> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;

    const std::string where = "line " + std::to_string(line_no);
    double v = 0.0;
    const char* first = line.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, line.data() + line.size(), v);
    if (ec == std::errc::result_out_of_range) throw DataError(where + ": value is not finite");
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      throw DataError(where + ": cannot parse '" + std::string(line) + "' as a number");
    }
    check_value(v, where);
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_json(std::string_view text, std::string_view key) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("JSON input must be an object");
  const auto it = doc.find(std::string(key));
  if (it == doc.end()) throw DataError("JSON input is missing key \"" + std::string(key) + "\"");
  if (!it->is_array()) throw DataError("JSON key \"" + std::string(key) + "\" must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& e = (*it)[i];
    const std::string where = std::string(key) + "[" + std::to_string(i) + "]";
    if (!e.is_number()) throw DataError(where + ": not a number");
    const double v = e.get<double>();
    check_value(v, where);
    out.push_back(v);
  }
  return out;
}

}  // namespace

DataFormat parse_format(std::string_view name) {
  if (name == "auto") return DataFormat::Auto;
  if (name == "csv") return DataFormat::Csv;
  if (name == "json") return DataFormat::Json;
  throw UsageError("unknown format '" + std::string(name) + "' (expected csv, json or auto)");
}

std::vector<double> parse_vector(std::string_view text, DataFormat format, std::string_view key) {
  if (format == DataFormat::Auto) {
    const auto first = text.find_first_not_of(" \t\r\n");
    format = (first != std::string_view::npos && text[first] == '{') ? DataFormat::Json
                                                                      : DataFormat::Csv;
  }
  std::vector<double> out = format == DataFormat::Json ? parse_json(text, key) : parse_csv(text);
  if (out.empty()) throw DataError("input contains no values");
  return out;
}

std::vector<double> read_observations(const std::filesystem::path& path, DataFormat format,
                                      std::string_view key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_vector(buf.str(), format, key);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

namespace {

nlohmann::json kt_json(const KTReport& kt) {
  nlohmann::json status = nlohmann::json::array();
  for (KTStatus s : kt.status) status.push_back(to_string(s));
  nlohmann::json out{{"status", status}, {"pass", kt.pass}, {"scale", kt.scale}};
  if (kt.error) out["error"] = *kt.error;
  return out;
}

nlohmann::json run_summary(const RunResult& r) {
  return {{"seed", r.seed},
          {"divergence", r.divergence},
          {"iterations", r.iterations_used},
          {"stop_reason", to_string(r.stop_reason)},
          {"kt_pass", r.kt.pass},
          {"x_final", std::vector<double>(r.x_final.values().begin(), r.x_final.values().end())}};
}

nlohmann::json config_json(const SolverConfig& cfg, const Observations& y) {
  return {{"max_iters", cfg.max_iters},
          {"tol_step", cfg.tol_step_for(y)},
          {"tol_grad", cfg.tol_grad},
          {"zero_threshold", cfg.zero_threshold_for(y)},
          {"init", describe(cfg.init)},
          {"seed", cfg.seed},
          {"n_starts", cfg.n_starts},
          {"rng", std::string(Rng::kAlgorithm)},
          {"kernel", std::string(kernels::active().name)}};
}

}  // namespace

nlohmann::json report_json(const MultiStartResult& result, const Observations& y,
                           const SolverConfig& cfg) {
  const RunResult& best = result.best();
  nlohmann::json out;
  out["m"] = y.m();
  out["c"] = y.c();
  out["x_final"] = std::vector<double>(best.x_final.values().begin(), best.x_final.values().end());
  out["divergence"] = best.divergence;
  out["iterations"] = best.iterations_used;
  out["stop_reason"] = to_string(best.stop_reason);
  out["gradient"] = best.gradient_final;
  out["kt"] = kt_json(best.kt);
  out["config"] = config_json(cfg, y);
  nlohmann::json runs = nlohmann::json::array();
  for (const RunResult& r : result.runs) runs.push_back(run_summary(r));
  out["runs"] = std::move(runs);
  out["best_index"] = result.best_index;
  out["agreement"] = result.agreement;
  out["disagreement"] = result.disagreement;
  if (best.hessian_spectrum) {
    out["hessian"] = {{"eigenvalues", best.hessian_spectrum->eigenvalues},
                      {"positive_definite", best.hessian_spectrum->positive_definite}};
  }
  if (best.limit_distance_monotone) out["limit_distance_monotone"] = *best.limit_distance_monotone;
  return out;
}

nlohmann::json report_json(const RunResult& result, const Observations& y,
                           const SolverConfig& cfg) {
  MultiStartResult single;
  single.runs.push_back(result);
  return report_json(single, y, cfg);
}

nlohmann::json simulation_json(const SimulatedData& data) {
  nlohmann::json out{{"name", data.name}, {"y", data.y}};
  if (data.x_true) out["x_true"] = *data.x_true;
  return out;
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw std::runtime_error("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw std::runtime_error("cannot move report into place at " + path.string() + ": " +
                             ec.message());
  }
}

void write_report(const nlohmann::json& report, const std::filesystem::path& path) {
  write_text_atomic(path, report.dump(2) + "\n");
}

nlohmann::json read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::string trace_csv(const std::vector<IterationRecord>& trace) {
  if (trace.empty()) throw UsageError("trace is empty");
  const bool snapshots = trace.front().x_snapshot.has_value();
  std::string out = "t,divergence,step_div,step_l1";
  if (snapshots) {
    for (std::size_t i = 0; i < trace.front().x_snapshot->size(); ++i) out += ",x" + std::to_string(i);
  }
  out += '\n';
  for (const IterationRecord& r : trace) {
    out += std::to_string(r.t);
    out += ',' + format_double(r.divergence);
    out += ',' + format_double(r.step_div);
    out += ',' + format_double(r.step_l1);
    if (snapshots && r.x_snapshot) {
      for (double v : *r.x_snapshot) out += ',' + format_double(v);
    }
    out += '\n';
  }
  return out;
}

void write_trace(const std::vector<IterationRecord>& trace, const std::filesystem::path& path) {
  write_text_atomic(path, trace_csv(trace));
}

}  // namespace deautoconv::io
