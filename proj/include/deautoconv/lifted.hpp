#pragma once

// Lifted formulation: the scalar problem recast over pairs of banded
// (2m+1) x (m+1) matrices, where both partial minimisations have closed
// forms. The code here works directly from the matrix definitions and does
// not go through the kernel layer, so it doubles as an independent oracle
// for the solver's update.

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "deautoconv/core.hpp"

namespace deautoconv {

/// Dense (2m+1) x (m+1) storage whose support is the diagonal and the first
/// m subdiagonals: entry (i, j) may be nonzero only when 0 <= i - j <= m.
class BandedMatrix {
 public:
  /// All-zero matrix for the given m.
  explicit BandedMatrix(std::size_t m);
  /// Throws DataError if a band entry is negative / non-finite and
  /// UsageError if an off-band entry is nonzero or the shape is wrong.
  BandedMatrix(std::size_t m, Eigen::MatrixXd entries);

  std::size_t m() const { return m_; }
  static bool in_band(std::size_t i, std::size_t j, std::size_t m) { return i >= j && i - j <= m; }

  double operator()(std::size_t i, std::size_t j) const;
  /// Band positions only; UsageError otherwise.
  void set(std::size_t i, std::size_t j, double value);

  const Eigen::MatrixXd& dense() const { return entries_; }
  double total() const { return entries_.sum(); }

 private:
  std::size_t m_;
  Eigen::MatrixXd entries_;
};

/// Element of the Y-set: banded with row sums equal to the data.
class LiftedY {
 public:
  /// Throws DataError when a row sum misses y_i by more than 1e-12 (1 + y_i).
  LiftedY(BandedMatrix base, Observations y);

  const BandedMatrix& matrix() const { return base_; }
  const Observations& data() const { return y_; }

 private:
  BandedMatrix base_;
  Observations y_;
};

/// Element of the W-set, parameterised by x: W_ij = x_{i-j} x_j on the band.
class LiftedW {
 public:
  explicit LiftedW(Signal x) : x_(std::move(x)) {}
  const Signal& signal() const { return x_; }
  BandedMatrix materialize() const;

 private:
  Signal x_;
};

/// Sum over band positions of M log(M/N) - M + N; +infinity when some
/// M_ij > 0 meets N_ij = 0. UsageError if the two m differ.
double i_divergence_matrix(const BandedMatrix& M, const BandedMatrix& N);

/// Minimiser of I(Y || W(x)) over the Y-set:
/// Y*_ij = x_{i-j} x_j y_i / (x*x)_i, rows with y_i = 0 identically zero.
/// NumericError if y_i > 0 but row i of W(x) sums to zero.
LiftedY best_y(const Signal& x, const Observations& y);

/// Minimiser of I(Y || W(x)) over x: x*_j = Yhat_j / (2 sqrt(sum y)), where
/// Yhat_j adds the j-th subdiagonal and the band part of the j-th column.
Signal best_w(const LiftedY& Y);

struct PythagorasReport {
  double total;   // I(Y || W)
  double first;   // I(Y || Y*)  or  I(Y || W*)
  double second;  // I(Y* || W)  or  I(W* || W)
  /// |total - first - second|; empty if any of the three is infinite.
  std::optional<double> residual;
};

/// Checks I(Y||W) = I(Y||Y*) + I(Y*||W) with W = W(x), Y* = best_y(x, y).
PythagorasReport check_pythagoras_y(const LiftedY& Y, const Signal& x);

/// Checks I(Y||W) = I(Y||W*) + I(W*||W) with W = W(x), W* = W(best_w(Y)).
PythagorasReport check_pythagoras_w(const LiftedY& Y, const Signal& x);

/// Square (m+1) x (m+1) matrix Ybar_ij = Y_{i+j, j}.
Eigen::MatrixXd rectify(const BandedMatrix& Y);
/// Inverse of rectify.
BandedMatrix unrectify(const Eigen::MatrixXd& Ybar);

/// Best symmetric rank-one fit x x^T to a square nonnegative matrix:
/// x_i = (column sum i + row sum i) / (2 sqrt(total)). DataError on zero total.
Signal rank_one_x(const Eigen::MatrixXd& Ybar);

}  // namespace deautoconv
