// deautoconv: command-line front end.
//
// Exit codes: 0 success, 1 data error, 2 usage error, 3 solved (or checked)
// but the Kuhn-Tucker test failed.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deautoconv/core.hpp"
#include "deautoconv/error.hpp"
#include "deautoconv/experiments.hpp"
#include "deautoconv/io.hpp"
#include "deautoconv/kernels.hpp"
#include "deautoconv/lifted.hpp"
#include "deautoconv/solver.hpp"

namespace {

using namespace deautoconv;

constexpr const char* kVersion = "1.0.0";

enum Exit : int { kOk = 0, kData = 1, kUsage = 2, kKtViolation = 3 };

Observations load_y(const std::string& path, io::DataFormat format) {
  std::vector<double> raw = io::read_observations(path, format, "y");
  if (raw.size() % 2 == 0) {
    std::cerr << "warning: y has even length " << raw.size()
              << "; appending a zero data point\n";
  }
  return pad_to_odd(std::move(raw));
}

InitPolicy parse_init(const std::string& text) {
  if (text == "flat") return FlatInit{};
  if (text.rfind("file:", 0) == 0) {
    return GivenInit{io::read_observations(text.substr(5), io::DataFormat::Auto, "x")};
  }
  if (text.rfind("uniform:", 0) == 0) {
    const std::string rest = text.substr(8);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        std::size_t used_lo = 0;
        std::size_t used_hi = 0;
        const std::string lo_text = rest.substr(0, colon);
        const std::string hi_text = rest.substr(colon + 1);
        const double lo = std::stod(lo_text, &used_lo);
        const double hi = std::stod(hi_text, &used_hi);
        if (used_lo == lo_text.size() && used_hi == hi_text.size()) return UniformInit{lo, hi};
      } catch (const std::logic_error&) {
      }
    }
  }
  throw UsageError("--init must be uniform:LO:HI, flat or file:PATH (got '" + text + "')");
}

void emit(const nlohmann::json& doc, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << '\n';
  } else {
    io::write_report(doc, path);
  }
}

struct SolveArgs {
  std::string input;
  std::string format = "auto";
  int iters = 1000;
  double tol_step = 1e-14;
  double tol_grad = 1e-6;
  int starts = 1;
  std::uint64_t seed = 0;
  std::string init = "uniform:0.1:0.2";
  std::string trace;
  bool snapshots = false;
  std::string report;
  bool hessian = false;
  unsigned threads = 0;
};

int cmd_solve(const SolveArgs& a) {
  const Observations y = load_y(a.input, io::parse_format(a.format));
  SolverConfig cfg;
  cfg.max_iters = a.iters;
  cfg.tol_step = a.tol_step * y.c();
  cfg.tol_grad = a.tol_grad;
  cfg.n_starts = a.starts;
  cfg.seed = a.seed;
  cfg.init = parse_init(a.init);
  cfg.record_trace = !a.trace.empty();
  cfg.record_x_snapshots = a.snapshots;
  cfg.compute_hessian = a.hessian;
  cfg.threads = a.threads;

  const MultiStartResult result = multi_start(y, cfg);
  emit(io::report_json(result, y, cfg), a.report);
  if (!a.trace.empty()) io::write_trace(result.best().trace, a.trace);
  if (result.disagreement) {
    std::cerr << "warning: starts disagree (final divergence spread " << result.agreement
              << "); some runs ended in a worse local minimum\n";
  }
  return result.best().kt.pass ? kOk : kKtViolation;
}

struct SimulateArgs {
  std::string mode;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  const SimulatedData data = a.mode == "exact" ? simulate_exact(a.m, a.seed)
                                               : simulate_random(a.m, a.seed);
  emit(io::simulation_json(data), a.out);
  return kOk;
}

struct CheckArgs {
  std::string input;
  std::string x;
  std::string format = "auto";
  double tol_grad = 1e-6;
};

nlohmann::json pythagoras_json(const PythagorasReport& r) {
  nlohmann::json out{{"total", r.total}, {"first", r.first}, {"second", r.second}};
  out["residual"] = r.residual ? nlohmann::json(*r.residual) : nlohmann::json(nullptr);
  return out;
}

// A generic element of the Y-set: each y_i spread evenly over its band row.
LiftedY spread_y(const Observations& y) {
  const std::size_t m = y.m();
  BandedMatrix b(m);
  for (std::size_t i = 0; i <= 2 * m; ++i) {
    const std::size_t jlo = i > m ? i - m : 0;
    const std::size_t jhi = i < m ? i : m;
    const double share = y[i] / static_cast<double>(jhi - jlo + 1);
    for (std::size_t j = jlo; j <= jhi; ++j) b.set(i, j, share);
  }
  return LiftedY(std::move(b), y);
}

int cmd_check(const CheckArgs& a) {
  const Observations y = load_y(a.input, io::parse_format(a.format));
  const Signal x(io::read_observations(a.x, io::DataFormat::Auto, "x"));
  if (x.m() != y.m()) {
    throw UsageError("dimension mismatch: y needs x of length " + std::to_string(y.m() + 1) +
                     ", got " + std::to_string(x.size()));
  }

  nlohmann::json out;
  const double obj = objective(y, x);
  out["objective"] = obj;
  const KTReport kt = kuhn_tucker_check(y, x, a.tol_grad, 1e-12 * y.c());
  out["gradient"] = kt.gradient;
  nlohmann::json status = nlohmann::json::array();
  for (KTStatus s : kt.status) status.push_back(to_string(s));
  out["kt"] = {{"status", status}, {"pass", kt.pass}, {"scale", kt.scale}};
  if (kt.error) out["kt"]["error"] = *kt.error;

  try {
    const LiftedY Y = spread_y(y);
    out["pythagoras_y"] = pythagoras_json(check_pythagoras_y(Y, x));
    out["pythagoras_w"] = pythagoras_json(check_pythagoras_w(Y, x));
    const LiftedY ystar = best_y(x, y);
    const double lifted = i_divergence_matrix(ystar.matrix(), LiftedW(x).materialize());
    out["fallback_residual"] = std::abs(lifted - obj);
  } catch (const NumericError& e) {
    out["pythagoras_error"] = e.what();
  }

  try {
    const HessianSpectrum s = hessian_spectrum(y, x);
    out["hessian"] = {{"eigenvalues", s.eigenvalues}, {"positive_definite", s.positive_definite}};
  } catch (const NumericError& e) {
    out["hessian"] = {{"error", e.what()}};
  }

  std::cout << out.dump(2) << '\n';
  return kt.pass ? kOk : kKtViolation;
}

int cmd_autoconv(const std::string& input) {
  const Signal x(io::read_observations(input, io::DataFormat::Auto, "x"));
  for (double v : autoconvolve(x)) std::cout << io::format_double(v) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonnegative deautoconvolution by I-divergence minimisation"};
  app.require_subcommand(1);
  std::string kernel;
  app.add_option("--kernel", kernel, "Force a kernel variant (scalar, avx2, neon)");

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Fit x >= 0 so that x*x approximates y");
  s->add_option("--input", solve.input, "Data file (y)")->required();
  s->add_option("--format", solve.format, "csv, json or auto")->check(CLI::IsMember({"csv", "json", "auto"}));
  s->add_option("--iters", solve.iters, "Iteration cap")->check(CLI::PositiveNumber);
  s->add_option("--tol-step", solve.tol_step, "Stop when I(x'||x) <= X * sqrt(sum y)")->check(CLI::PositiveNumber);
  s->add_option("--tol-grad", solve.tol_grad, "Kuhn-Tucker gradient tolerance")->check(CLI::PositiveNumber);
  s->add_option("--starts", solve.starts, "Number of random starts")->check(CLI::PositiveNumber);
  s->add_option("--seed", solve.seed, "Seed of the first start");
  s->add_option("--init", solve.init, "uniform:LO:HI, flat or file:PATH");
  s->add_option("--trace", solve.trace, "Write the best run's trace as CSV");
  s->add_flag("--snapshots", solve.snapshots, "Include x^t columns in the trace");
  s->add_option("--report", solve.report, "Report path (default stdout)");
  s->add_flag("--hessian", solve.hessian, "Report the Hessian spectrum at the solution");
  s->add_option("--threads", solve.threads, "Worker threads for multi-start (0 = auto)");

  SimulateArgs sim;
  auto* sm = app.add_subcommand("simulate", "Generate exact-model or random data");
  sm->add_option("--mode", sim.mode, "exact or random")->required()->check(CLI::IsMember({"exact", "random"}));
  sm->add_option("--m", sim.m, "Half support size")->required();
  sm->add_option("--seed", sim.seed, "Seed");
  sm->add_option("--out", sim.out, "Output path (default stdout)");

  CheckArgs chk;
  auto* c = app.add_subcommand("check", "Diagnose a candidate x against data y");
  c->add_option("--input", chk.input, "Data file (y)")->required();
  c->add_option("--x", chk.x, "Candidate x file")->required();
  c->add_option("--format", chk.format, "csv, json or auto")->check(CLI::IsMember({"csv", "json", "auto"}));
  c->add_option("--tol-grad", chk.tol_grad, "Kuhn-Tucker gradient tolerance")->check(CLI::PositiveNumber);

  std::string autoconv_input;
  auto* ac = app.add_subcommand("autoconv", "Print x*x as a CSV column");
  ac->add_option("--input", autoconv_input, "x file")->required();

  app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (!kernel.empty() && !kernels::select(kernel)) {
      throw UsageError("kernel '" + kernel + "' is not available on this machine");
    }
    if (*s) return cmd_solve(solve);
    if (*sm) return cmd_simulate(sim);
    if (*c) return cmd_check(chk);
    if (*ac) return cmd_autoconv(autoconv_input);
    std::cout << "deautoconv " << kVersion << " (kernel " << kernels::active().name << ")\n";
    return kOk;
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    std::cerr << "numeric: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
}
