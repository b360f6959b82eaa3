#include "deautoconv/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "deautoconv/error.hpp"
#include "deautoconv/kernels.hpp"
#include "deautoconv/lifted.hpp"
#include "deautoconv/random.hpp"

namespace deautoconv {

std::string describe(const InitPolicy& init) {
  struct {
    std::string operator()(const UniformInit& u) const {
      std::ostringstream out;
      out << "uniform:" << u.lo << ':' << u.hi;
      return out.str();
    }
    std::string operator()(const FlatInit&) const { return "flat"; }
    std::string operator()(const GivenInit&) const { return "given"; }
  } visitor;
  return std::visit(visitor, init);
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw UsageError("max_iters must be >= 1");
  if (n_starts < 1) throw UsageError("n_starts must be >= 1");
  if (tol_step && !(*tol_step > 0.0)) throw UsageError("tol_step must be > 0");
  if (!(tol_grad > 0.0)) throw UsageError("tol_grad must be > 0");
  if (zero_threshold && !(*zero_threshold >= 0.0)) throw UsageError("zero_threshold must be >= 0");
  if (const auto* u = std::get_if<UniformInit>(&init)) {
    if (!(u->lo > 0.0) || !(u->hi >= u->lo) || !std::isfinite(u->hi)) {
      throw UsageError("uniform init needs 0 < lo <= hi");
    }
  }
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Tolerance: return "tolerance";
    case StopReason::MaxIters: return "max-iters";
    case StopReason::ExactMatch: return "exact-match";
  }
  return "unknown";
}

std::string to_string(KTStatus status) {
  switch (status) {
    case KTStatus::InteriorStationary: return "interior-stationary";
    case KTStatus::BoundaryOk: return "boundary-ok";
    case KTStatus::Violation: return "violation";
  }
  return "unknown";
}

namespace {

void check_same_m(const Observations& y, const Signal& x) {
  if (y.m() != x.m()) {
    throw UsageError("dimension mismatch: y has m = " + std::to_string(y.m()) +
                     " but x has m = " + std::to_string(x.m()));
  }
}

// Update with a precomputed autoconvolution of x.
std::vector<double> update_values(const Observations& y, std::span<const double> x,
                                  std::span<const double> conv) {
  const std::size_t n = x.size();
  std::vector<double> r = data_ratios(y, conv);
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!std::isinf(r[k])) continue;
    // Harmless unless two positive coordinates pair up at k; any other
    // contribution is multiplied by a zero x_l or a zero x_j.
    const std::size_t lo = k >= n ? k - (n - 1) : 0;
    const std::size_t hi = k < n ? k : n - 1;
    for (std::size_t l = lo; l <= hi; ++l) {
      if (x[l] > 0.0 && x[k - l] > 0.0) {
        throw NumericError("update undefined: (x*x)_" + std::to_string(k) +
                           " underflowed to zero");
      }
    }
    r[k] = 0.0;
  }
  std::vector<double> out(n);
  kernels::active().correlate(x, r, out);
  const double inv_c = 1.0 / y.c();
  for (std::size_t j = 0; j < n; ++j) out[j] = x[j] == 0.0 ? 0.0 : x[j] * out[j] * inv_c;
  return out;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

}  // namespace

Signal update_step(const Observations& y, const Signal& x) {
  check_same_m(y, x);
  return Signal(update_values(y, x.values(), autoconvolve(x)));
}

Signal update_step_gradient_form(const Observations& y, const Signal& x) {
  check_same_m(y, x);
  const double c = y.c();
  if (std::abs(x.sum() - c) > 1e-10 * c) {
    throw UsageError("gradient form of the update requires sum x = c");
  }
  const std::vector<double> g = gradient(y, x);
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = x[j] * (1.0 - g[j] / (2.0 * c));
  return Signal(std::move(out));
}

Signal initial_point(const Observations& y, const InitPolicy& init, std::uint64_t seed) {
  const std::size_t n = y.m() + 1;
  struct {
    std::size_t n;
    double c;
    std::uint64_t seed;
    std::vector<double> operator()(const UniformInit& u) const {
      Rng rng(seed);
      std::vector<double> x(n);
      for (double& v : x) v = rng.uniform(u.lo, u.hi);
      return x;
    }
    std::vector<double> operator()(const FlatInit&) const {
      return std::vector<double>(n, c / static_cast<double>(n));
    }
    std::vector<double> operator()(const GivenInit& g) const {
      if (g.values.size() != n) {
        throw UsageError("initial x has length " + std::to_string(g.values.size()) +
                         ", expected m+1 = " + std::to_string(n));
      }
      return g.values;
    }
  } visitor{n, y.c(), seed};
  return Signal(std::visit(visitor, init));
}

RunResult run(const Observations& y, const Signal& x0, const SolverConfig& cfg) {
  cfg.validate();
  check_same_m(y, x0);
  if (!cfg.allow_boundary_start) {
    for (double v : x0.values()) {
      if (!(v > 0.0)) throw UsageError("x0 must be strictly positive");
    }
  }

  const double tol_step = cfg.tol_step_for(y);
  const double exact_tol = 1e-14 * y.sum();
  const auto& kern = kernels::active();

  std::vector<double> x(x0.values().begin(), x0.values().end());
  std::vector<double> conv(2 * x.size() - 1);
  kern.autoconvolve(x, conv);
  double div = i_divergence(y.values(), conv);
  if (std::isinf(div)) throw NumericError("objective is infinite at x0");

  RunResult res;
  res.seed = cfg.seed;
  res.rng = std::string(Rng::kAlgorithm);

  auto record = [&](int t, double d, std::span<const double> from, std::span<const double> to) {
    if (!cfg.record_trace) return;
    IterationRecord rec;
    rec.t = t;
    rec.divergence = d;
    rec.step_div = i_divergence(to, from);
    rec.step_l1 = l1_distance(to, from);
    if (cfg.record_x_snapshots) rec.x_snapshot = std::vector<double>(from.begin(), from.end());
    res.trace.push_back(std::move(rec));
  };

  int t = 0;
  StopReason stop = StopReason::MaxIters;
  if (div <= exact_tol) stop = StopReason::ExactMatch;
  while (stop == StopReason::MaxIters && t < cfg.max_iters) {
    std::vector<double> next = update_values(y, x, conv);
    std::vector<double> next_conv(conv.size());
    kern.autoconvolve(next, next_conv);
    const double next_div = i_divergence(y.values(), next_conv);
    if (std::isinf(next_div)) throw NumericError("objective became infinite at t = " + std::to_string(t + 1));
    const double step_div = i_divergence(next, x);

    record(t, div, x, next);
    x = std::move(next);
    conv = std::move(next_conv);
    div = next_div;
    ++t;

    if (div <= exact_tol) {
      stop = StopReason::ExactMatch;
    } else if (step_div <= tol_step) {
      stop = StopReason::Tolerance;
    }
  }

  // Terminal record: step quantities come from one probe update that is not applied.
  if (cfg.record_trace) record(t, div, x, update_values(y, x, conv));

  res.x_final = Signal(x);
  res.divergence = div;
  res.iterations_used = t;
  res.stop_reason = stop;
  res.kt = kuhn_tucker_check(y, res.x_final, cfg.tol_grad, cfg.zero_threshold_for(y));
  res.gradient_final = res.kt.gradient;
  if (cfg.compute_hessian) res.hessian_spectrum = hessian_spectrum(y, res.x_final);

  if (cfg.record_trace && cfg.record_x_snapshots) {
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const IterationRecord& rec : res.trace) {
      const double d = i_divergence(x, *rec.x_snapshot);
      if (d > prev + 1e-12 * (1.0 + prev)) monotone = false;
      prev = d;
    }
    res.limit_distance_monotone = monotone;
  }
  return res;
}

MultiStartResult multi_start(const Observations& y, const SolverConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.n_starts);
  std::vector<std::optional<RunResult>> slots(n);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](std::size_t k) {
    try {
      SolverConfig local = cfg;
      local.seed = cfg.seed + k;
      slots[k] = run(y, initial_point(y, local.init, local.seed), local);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  unsigned workers = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) work(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < n; k = next++) work(k);
      });
    }
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  MultiStartResult out;
  out.runs.reserve(n);
  for (auto& s : slots) out.runs.push_back(std::move(*s));
  double lo = out.runs[0].divergence;
  double hi = lo;
  for (std::size_t k = 1; k < n; ++k) {
    const double d = out.runs[k].divergence;
    if (d < out.runs[out.best_index].divergence) out.best_index = k;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  out.agreement = hi - lo;
  out.disagreement = out.agreement > 1e-6 * y.sum();
  return out;
}

KTReport kuhn_tucker_check(const Observations& y, const Signal& x, double tol_grad,
                           double zero_threshold) {
  check_same_m(y, x);
  KTReport rep;
  rep.scale = 2.0 * y.c();
  try {
    rep.gradient = gradient(y, x);
  } catch (const NumericError& e) {
    rep.error = e.what();
    rep.pass = false;
    return rep;
  }
  const double tol = tol_grad * (1.0 + rep.scale);
  rep.pass = true;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double g = rep.gradient[j];
    KTStatus s;
    if (x[j] > zero_threshold) {
      s = std::abs(g) <= tol ? KTStatus::InteriorStationary : KTStatus::Violation;
    } else {
      s = g >= -tol ? KTStatus::BoundaryOk : KTStatus::Violation;
    }
    if (s == KTStatus::Violation) rep.pass = false;
    rep.status.push_back(s);
  }
  return rep;
}

HessianSpectrum hessian_spectrum(const Observations& y, const Signal& x) {
  const HessianDecomposition d = hessian(y, x);
  HessianSpectrum s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d.H, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  s.positive_definite = Eigen::LLT<Eigen::MatrixXd>(d.H).info() == Eigen::Success;
  return s;
}

Signal closed_form_m1(const Observations& y) {
  if (y.m() != 1) throw UsageError("closed_form_m1 requires m = 1");
  const double denom = 2.0 * std::sqrt(y.sum());
  return Signal({(2.0 * y[0] + y[1]) / denom, (2.0 * y[2] + y[1]) / denom});
}

bool exact_match_condition_m1(const Observations& y) {
  if (y.m() != 1) throw UsageError("exact_match_condition_m1 requires m = 1");
  const double lhs = y[1] * y[1];
  const double rhs = 4.0 * y[0] * y[2];
  return std::abs(lhs - rhs) <= 1e-10 * std::max(lhs, rhs);
}

StepDiagnostics step_diagnostics(const Signal& x_prev, const Signal& x_next) {
  if (x_prev.size() != x_next.size()) throw UsageError("step_diagnostics: length mismatch");
  StepDiagnostics d;
  d.div_x = i_divergence(x_next.values(), x_prev.values());
  d.l1 = l1_distance(x_next.values(), x_prev.values());
  if (std::isinf(d.div_x)) {
    d.finite = d.consistent = d.pinsker_ok = false;
    d.div_w_matrix = d.div_w_scaled = d.div_x;
    return d;
  }

  // Entry (i, j) of the band has W = x_{i-j} x_j, and its ratio W'/W is
  // (1 + r_{i-j})(1 + r_j) with r the relative change of x. Forming the ratio
  // from r rather than from the rounded products keeps small steps accurate.
  const std::size_t n = x_prev.size();
  std::vector<double> r(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (x_prev[j] > 0.0) r[j] = (x_next[j] - x_prev[j]) / x_prev[j];
  }
  double acc = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double w = x_prev[a] * x_prev[b];
      if (w == 0.0) continue;
      acc += divergence_term_ratio(w, r[a] + r[b] + r[a] * r[b]);
    }
  }
  d.div_w_matrix = acc;
  d.div_w_scaled = 2.0 * x_next.sum() * d.div_x;
  d.consistent = std::abs(d.div_w_matrix - d.div_w_scaled) <=
                 1e-10 * std::max(d.div_w_matrix, d.div_w_scaled);
  d.pinsker_ok = d.l1 <= std::sqrt(d.div_w_matrix) + 1e-12;
  return d;
}

}  // namespace deautoconv
