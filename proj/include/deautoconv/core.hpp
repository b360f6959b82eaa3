#pragma once

// Signals, autoconvolution, I-divergence and the deautoconvolution objective
// with its first and second derivatives. Everything here is a pure function
// of its arguments.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace deautoconv {

/// Nonnegative signal x = (x_0, ..., x_m); entries outside [0, m] are zero.
class Signal {
 public:
  /// Throws DataError on an empty vector or a negative / non-finite entry.
  explicit Signal(std::vector<double> values);

  std::size_t m() const { return values_.size() - 1; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  double sum() const;

  bool operator==(const Signal&) const = default;

 private:
  std::vector<double> values_;
};

/// Data vector y = (y_0, ..., y_{2m}), nonnegative and not identically zero.
class Observations {
 public:
  /// Throws DataError unless the length is odd, entries are finite and
  /// nonnegative, and at least one entry is positive.
  explicit Observations(std::vector<double> values);

  std::size_t m() const { return (values_.size() - 1) / 2; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  double sum() const { return sum_; }
  /// c = sqrt(sum y): the common coordinate sum of every iterate after the first.
  double c() const { return c_; }

 private:
  std::vector<double> values_;
  double sum_;
  double c_;
};

/// H = P + Q with P = 4 sum_k (y_k/(x*x)_k^2) xi_k xi_k^T, xi_k = S^(k) x,
/// Q = 2(11^T - R), R_ij = y_{i+j}/(x*x)_{i+j}.
struct HessianDecomposition {
  Eigen::MatrixXd P;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd H;
  Eigen::MatrixXd R;
};

/// (x*x)_i = sum_j x_{i-j} x_j for i = 0..2m, via the active kernel table.
std::vector<double> autoconvolve(const Signal& x);

/// One term u log(u/v) - u + v of the I-divergence, with 0 log(0/v) = 0 and
/// +infinity for u > 0, v = 0. Evaluated through the expansion in
/// d = u/v - 1 when u and v are close, so nearly equal arguments keep full
/// relative accuracy instead of cancelling.
double divergence_term(double u, double v);

/// The same term written through the ratio: v ((1+d) log(1+d) - d) with
/// u = v (1 + d). Lets callers that know d more accurately than u and v pass
/// it directly. Requires v > 0 and d >= -1.
double divergence_term_ratio(double v, double d);

/// Generalised KL divergence sum u log(u/v) - u + v, with 0 log(0/v) = 0.
/// Returns +infinity if some u_i > 0 meets v_i = 0. UsageError on length mismatch.
double i_divergence(std::span<const double> u, std::span<const double> v);

/// I(y || x*x). UsageError if x and y disagree on m.
double objective(const Observations& y, const Signal& x);

/// Ratios r_k = y_k/(x*x)_k with r_k = 0 wherever y_k = 0. Entries where
/// y_k > 0 but (x*x)_k = 0 come back as +infinity; callers decide whether a
/// positive x coordinate actually touches them.
std::vector<double> data_ratios(const Observations& y, std::span<const double> conv);

/// grad_j = 2 sum_l x_l (1 - y_{l+j}/(x*x)_{l+j}). Terms with x_l = 0 vanish
/// even where the ratio is undefined; NumericError if a positive x_l meets one.
std::vector<double> gradient(const Observations& y, const Signal& x);

/// NumericError if some y_k > 0 has (x*x)_k = 0.
HessianDecomposition hessian(const Observations& y, const Signal& x);

/// Appends the zero data point that makes an even-length vector odd.
/// DataError on empty or all-zero input.
Observations pad_to_odd(std::vector<double> raw);

/// Returns (y / sum y, sum y).
std::pair<Observations, double> normalize_probability(const Observations& y);

}  // namespace deautoconv
