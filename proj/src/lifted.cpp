#include "deautoconv/lifted.hpp"

#include <cmath>
#include <string>

#include "deautoconv/error.hpp"

namespace deautoconv {
namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

BandedMatrix::BandedMatrix(std::size_t m)
    : m_(m), entries_(Eigen::MatrixXd::Zero(idx(2 * m + 1), idx(m + 1))) {}

BandedMatrix::BandedMatrix(std::size_t m, Eigen::MatrixXd entries)
    : m_(m), entries_(std::move(entries)) {
  if (entries_.rows() != idx(2 * m + 1) || entries_.cols() != idx(m + 1)) {
    throw UsageError("banded matrix must be (2m+1) x (m+1)");
  }
  for (std::size_t i = 0; i < 2 * m + 1; ++i) {
    for (std::size_t j = 0; j < m + 1; ++j) {
      const double v = entries_(idx(i), idx(j));
      if (!in_band(i, j, m)) {
        if (v != 0.0) throw UsageError("nonzero entry outside the band");
      } else if (!std::isfinite(v) || v < 0.0) {
        throw DataError("band entries must be finite and nonnegative");
      }
    }
  }
}

double BandedMatrix::operator()(std::size_t i, std::size_t j) const {
  return entries_(idx(i), idx(j));
}

void BandedMatrix::set(std::size_t i, std::size_t j, double value) {
  if (!in_band(i, j, m_) || j > m_) throw UsageError("write outside the band");
  entries_(idx(i), idx(j)) = value;
}

LiftedY::LiftedY(BandedMatrix base, Observations y) : base_(std::move(base)), y_(std::move(y)) {
  if (base_.m() != y_.m()) throw UsageError("lifted Y: matrix and data disagree on m");
  for (std::size_t i = 0; i < y_.size(); ++i) {
    const double row = base_.dense().row(idx(i)).sum();
    if (std::abs(row - y_[i]) > 1e-12 * (1.0 + y_[i])) {
      throw DataError("lifted Y: row " + std::to_string(i) + " does not sum to y_" +
                      std::to_string(i));
    }
  }
}

BandedMatrix LiftedW::materialize() const {
  const std::size_t m = x_.m();
  BandedMatrix w(m);
  for (std::size_t j = 0; j <= m; ++j) {
    for (std::size_t i = j; i <= j + m; ++i) w.set(i, j, x_[i - j] * x_[j]);
  }
  return w;
}

double i_divergence_matrix(const BandedMatrix& M, const BandedMatrix& N) {
  if (M.m() != N.m()) throw UsageError("i_divergence_matrix: shape mismatch");
  const std::size_t m = M.m();
  double acc = 0.0;
  for (std::size_t j = 0; j <= m; ++j) {
    for (std::size_t i = j; i <= j + m; ++i) {
      const double term = divergence_term(M(i, j), N(i, j));
      if (std::isinf(term)) return term;
      acc += term;
    }
  }
  return acc;
}

LiftedY best_y(const Signal& x, const Observations& y) {
  if (x.m() != y.m()) throw UsageError("best_y: x and y disagree on m");
  const BandedMatrix w = LiftedW(x).materialize();
  const std::size_t m = x.m();
  BandedMatrix out(m);
  for (std::size_t i = 0; i < 2 * m + 1; ++i) {
    if (y[i] == 0.0) continue;
    const double row = w.dense().row(idx(i)).sum();
    if (row == 0.0) {
      throw NumericError("best_y: y_" + std::to_string(i) + " > 0 but row " +
                         std::to_string(i) + " of W is zero");
    }
    const double scale = y[i] / row;
    const std::size_t jlo = i > m ? i - m : 0;
    const std::size_t jhi = i < m ? i : m;
    for (std::size_t j = jlo; j <= jhi; ++j) out.set(i, j, w(i, j) * scale);
  }
  return LiftedY(std::move(out), y);
}

Signal best_w(const LiftedY& Y) {
  const BandedMatrix& mat = Y.matrix();
  const std::size_t m = mat.m();
  if (!(mat.total() > 0.0)) throw DataError("best_w: Y is identically zero");
  const double denom = 2.0 * std::sqrt(Y.data().sum());
  std::vector<double> x(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    double yhat = 0.0;
    for (std::size_t i = 0; i <= m; ++i) yhat += mat(i + j, i);  // j-th subdiagonal
    for (std::size_t i = j; i <= j + m; ++i) yhat += mat(i, j);  // j-th column
    x[j] = yhat / denom;
  }
  return Signal(std::move(x));
}

namespace {

PythagorasReport make_report(double total, double first, double second) {
  PythagorasReport r{total, first, second, std::nullopt};
  if (std::isfinite(total) && std::isfinite(first) && std::isfinite(second)) {
    r.residual = std::abs(total - first - second);
  }
  return r;
}

}  // namespace

PythagorasReport check_pythagoras_y(const LiftedY& Y, const Signal& x) {
  const BandedMatrix w = LiftedW(x).materialize();
  const LiftedY ystar = best_y(x, Y.data());
  return make_report(i_divergence_matrix(Y.matrix(), w),
                     i_divergence_matrix(Y.matrix(), ystar.matrix()),
                     i_divergence_matrix(ystar.matrix(), w));
}

PythagorasReport check_pythagoras_w(const LiftedY& Y, const Signal& x) {
  const BandedMatrix w = LiftedW(x).materialize();
  const BandedMatrix wstar = LiftedW(best_w(Y)).materialize();
  return make_report(i_divergence_matrix(Y.matrix(), w),
                     i_divergence_matrix(Y.matrix(), wstar),
                     i_divergence_matrix(wstar, w));
}

Eigen::MatrixXd rectify(const BandedMatrix& Y) {
  const std::size_t m = Y.m();
  Eigen::MatrixXd out(idx(m + 1), idx(m + 1));
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= m; ++j) out(idx(i), idx(j)) = Y(i + j, j);
  }
  return out;
}

BandedMatrix unrectify(const Eigen::MatrixXd& Ybar) {
  if (Ybar.rows() != Ybar.cols() || Ybar.rows() == 0) {
    throw UsageError("unrectify: expected a nonempty square matrix");
  }
  const auto m = static_cast<std::size_t>(Ybar.rows() - 1);
  BandedMatrix out(m);
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= m; ++j) out.set(i + j, j, Ybar(idx(i), idx(j)));
  }
  return out;
}

Signal rank_one_x(const Eigen::MatrixXd& Ybar) {
  if (Ybar.rows() != Ybar.cols() || Ybar.rows() == 0) {
    throw UsageError("rank_one_x: expected a nonempty square matrix");
  }
  const double total = Ybar.sum();
  if (!(total > 0.0)) throw DataError("rank_one_x: matrix total must be positive");
  const double denom = 2.0 * std::sqrt(total);
  std::vector<double> x(static_cast<std::size_t>(Ybar.rows()));
  for (Eigen::Index i = 0; i < Ybar.rows(); ++i) {
    x[static_cast<std::size_t>(i)] = (Ybar.col(i).sum() + Ybar.row(i).sum()) / denom;
  }
  return Signal(std::move(x));
}

}  // namespace deautoconv
