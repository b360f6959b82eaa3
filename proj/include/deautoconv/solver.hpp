#pragma once

// The alternating-minimisation algorithm for deautoconvolution:
//
//   x'_j = x_j / c * sum_l x_l y_{l+j} / (x*x)_{l+j},   c = sqrt(sum y),
//
// plus the run loop, multi-start orchestration and the diagnostics used to
// certify a returned point (Kuhn-Tucker classification, step identities).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "deautoconv/core.hpp"

namespace deautoconv {

struct UniformInit {
  double lo = 0.1;
  double hi = 0.2;
};
struct FlatInit {};
struct GivenInit {
  std::vector<double> values;
};
using InitPolicy = std::variant<UniformInit, FlatInit, GivenInit>;

std::string describe(const InitPolicy& init);

struct SolverConfig {
  int max_iters = 1000;
  /// Absolute threshold on I(x^{t+1} || x^t). Unset means 1e-14 * c.
  std::optional<double> tol_step;
  double tol_grad = 1e-6;
  /// Unset means 1e-12 * c.
  std::optional<double> zero_threshold;
  InitPolicy init = UniformInit{};
  std::uint64_t seed = 0;
  int n_starts = 1;
  bool record_trace = true;
  bool record_x_snapshots = false;
  bool compute_hessian = false;
  /// Permit x0 with zero coordinates (they stay zero forever).
  bool allow_boundary_start = false;
  /// Worker threads for multi_start; 0 means hardware concurrency.
  unsigned threads = 0;

  double tol_step_for(const Observations& y) const { return tol_step.value_or(1e-14 * y.c()); }
  double zero_threshold_for(const Observations& y) const {
    return zero_threshold.value_or(1e-12 * y.c());
  }
  /// UsageError on out-of-range settings.
  void validate() const;
};

struct IterationRecord {
  int t = 0;
  double divergence = 0.0;  // I(y || x^t * x^t)
  double step_div = 0.0;    // I(x^{t+1} || x^t)
  double step_l1 = 0.0;     // sum |x^{t+1} - x^t|
  std::optional<std::vector<double>> x_snapshot;
};

enum class StopReason { Tolerance, MaxIters, ExactMatch };
std::string to_string(StopReason reason);

enum class KTStatus { InteriorStationary, BoundaryOk, Violation };
std::string to_string(KTStatus status);

struct KTReport {
  std::vector<KTStatus> status;
  std::vector<double> gradient;
  /// Gradient entries are compared against tol_grad * (1 + scale), scale = 2c.
  double scale = 0.0;
  bool pass = false;
  /// Set when the gradient is undefined at x; status is then empty.
  std::optional<std::string> error;
};

struct HessianSpectrum {
  std::vector<double> eigenvalues;  // ascending
  bool positive_definite = false;   // Cholesky of H succeeded
};

struct RunResult {
  Signal x_final{std::vector<double>{0.0}};
  double divergence = 0.0;
  int iterations_used = 0;
  StopReason stop_reason = StopReason::MaxIters;
  std::vector<double> gradient_final;
  KTReport kt;
  std::vector<IterationRecord> trace;
  std::optional<HessianSpectrum> hessian_spectrum;
  std::uint64_t seed = 0;
  std::string rng;
  /// With snapshots: whether I(x_final || x^t) was non-increasing in t.
  std::optional<bool> limit_distance_monotone;
};

struct MultiStartResult {
  std::vector<RunResult> runs;  // ordered by seed
  std::size_t best_index = 0;
  /// max - min of the final divergences.
  double agreement = 0.0;
  /// agreement > 1e-6 * sum y: some start ended in a worse local minimum.
  bool disagreement = false;

  const RunResult& best() const { return runs[best_index]; }
};

/// One multiplicative update. Zero coordinates stay zero. NumericError if a
/// pair of positive coordinates meets (x*x)_k = 0 (only via underflow).
Signal update_step(const Observations& y, const Signal& x);

/// The same update written as x'_j = x_j (1 - grad_j / (2c)). Only valid on
/// the simplex sum x = c; UsageError when |sum x - c| > 1e-10 c.
Signal update_step_gradient_form(const Observations& y, const Signal& x);

/// Initial point for a given start seed.
Signal initial_point(const Observations& y, const InitPolicy& init, std::uint64_t seed);

RunResult run(const Observations& y, const Signal& x0, const SolverConfig& cfg);

/// cfg.n_starts independent runs with seeds cfg.seed, cfg.seed + 1, ...
/// Best run: lowest final divergence, ties to the lower seed.
MultiStartResult multi_start(const Observations& y, const SolverConfig& cfg);

KTReport kuhn_tucker_check(const Observations& y, const Signal& x, double tol_grad,
                           double zero_threshold);

HessianSpectrum hessian_spectrum(const Observations& y, const Signal& x);

/// Unique minimiser for m = 1:
/// x_0 = (2y_0 + y_1) / (2 sqrt(sum y)), x_1 = (2y_2 + y_1) / (2 sqrt(sum y)).
Signal closed_form_m1(const Observations& y);

/// y admits an exact m = 1 factorisation iff y_1^2 = 4 y_0 y_2 (relative 1e-10).
bool exact_match_condition_m1(const Observations& y);

struct StepDiagnostics {
  double div_x = 0.0;         // I(x_next || x_prev)
  double div_w_matrix = 0.0;  // I(W(x_next) || W(x_prev)) summed over the band
  double div_w_scaled = 0.0;  // 2c * div_x, c = sum x_next
  double l1 = 0.0;
  bool finite = true;
  /// The two div_w values agree to 1e-10 relative.
  bool consistent = true;
  /// l1 <= sqrt(div_w_matrix) + 1e-12.
  bool pinsker_ok = true;
};

/// Identities between consecutive iterates on the simplex.
StepDiagnostics step_diagnostics(const Signal& x_prev, const Signal& x_next);

}  // namespace deautoconv
