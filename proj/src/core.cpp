#include "deautoconv/core.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "deautoconv/error.hpp"
#include "deautoconv/kernels.hpp"

namespace deautoconv {
namespace {

void check_entries(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw DataError(std::string(what) + ": entry " + std::to_string(i) + " is not finite");
    }
    if (v[i] < 0.0) {
      throw DataError(std::string(what) + ": entry " + std::to_string(i) + " is negative");
    }
  }
}

void check_same_m(const Observations& y, const Signal& x) {
  if (y.m() != x.m()) {
    throw UsageError("dimension mismatch: y has m = " + std::to_string(y.m()) +
                     " but x has m = " + std::to_string(x.m()));
  }
}

}  // namespace

Signal::Signal(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DataError("x must not be empty");
  check_entries(values_, "x");
}

double Signal::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

Observations::Observations(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DataError("y must not be empty");
  if (values_.size() % 2 == 0) throw DataError("y must have odd length 2m+1");
  check_entries(values_, "y");
  sum_ = std::accumulate(values_.begin(), values_.end(), 0.0);
  if (!(sum_ > 0.0)) throw DataError("y must not be all zero");
  c_ = std::sqrt(sum_);
}

std::vector<double> autoconvolve(const Signal& x) {
  std::vector<double> out(2 * x.size() - 1);
  kernels::active().autoconvolve(x.values(), out);
  return out;
}

double divergence_term(double u, double v) {
  if (u == 0.0) return v;
  if (v == 0.0) return std::numeric_limits<double>::infinity();
  return divergence_term_ratio(v, (u - v) / v);
}

double divergence_term_ratio(double v, double d) {
  if (d == -1.0) return v;
  if (std::abs(d) > 0.1) return v * ((1.0 + d) * std::log1p(d) - d);
  // (1+d) log(1+d) - d = sum_{n>=2} (-1)^n d^n / (n (n-1))
  double acc = 0.0;
  double power = d * d;
  for (int n = 2; n < 64; ++n) {
    const double t = power / (n * (n - 1.0));
    acc += (n % 2 == 0) ? t : -t;
    if (std::abs(t) <= 1e-17 * std::abs(acc)) break;
    power *= d;
  }
  return v * acc;
}

double i_divergence(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw UsageError("i_divergence: length mismatch (" + std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double term = divergence_term(u[i], v[i]);
    if (std::isinf(term)) return term;
    acc += term;
  }
  return acc;
}

double objective(const Observations& y, const Signal& x) {
  check_same_m(y, x);
  return i_divergence(y.values(), autoconvolve(x));
}

std::vector<double> data_ratios(const Observations& y, std::span<const double> conv) {
  std::vector<double> r(y.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (y[k] == 0.0) {
      r[k] = 0.0;
    } else if (conv[k] == 0.0) {
      r[k] = std::numeric_limits<double>::infinity();
    } else {
      r[k] = y[k] / conv[k];
    }
  }
  return r;
}

std::vector<double> gradient(const Observations& y, const Signal& x) {
  check_same_m(y, x);
  const std::size_t n = x.size();
  std::vector<double> r = data_ratios(y, autoconvolve(x));

  // An undefined ratio at k is harmless only if every x_l that pairs with it
  // (l <= k <= l + m) is zero; then the whole term is 0 * (...) = 0.
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!std::isinf(r[k])) continue;
    const std::size_t lo = k >= n ? k - (n - 1) : 0;
    const std::size_t hi = k < n ? k : n - 1;
    for (std::size_t l = lo; l <= hi; ++l) {
      if (x[l] > 0.0) {
        throw NumericError("gradient undefined: y_" + std::to_string(k) +
                           " > 0 but (x*x)_" + std::to_string(k) + " = 0");
      }
    }
    r[k] = 0.0;
  }

  std::vector<double> corr(n);
  kernels::active().correlate(x.values(), r, corr);
  const double s = x.sum();
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) g[j] = 2.0 * (s - corr[j]);
  return g;
}

HessianDecomposition hessian(const Observations& y, const Signal& x) {
  check_same_m(y, x);
  const std::size_t n = x.size();
  const std::vector<double> conv = autoconvolve(x);
  const std::vector<double> r = data_ratios(y, conv);
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (std::isinf(r[k])) {
      throw NumericError("hessian undefined: y_" + std::to_string(k) + " > 0 but (x*x)_" +
                         std::to_string(k) + " = 0");
    }
  }

  const auto ni = static_cast<Eigen::Index>(n);
  HessianDecomposition d;
  d.R.resize(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index j = 0; j < ni; ++j) d.R(i, j) = r[static_cast<std::size_t>(i + j)];
  }
  d.Q = 2.0 * (Eigen::MatrixXd::Ones(ni, ni) - d.R);

  // xi_k = S^(k) x has entries (xi_k)_i = x_{k-i}.
  d.P = Eigen::MatrixXd::Zero(ni, ni);
  Eigen::VectorXd xi(ni);
  for (std::size_t k = 0; k < conv.size(); ++k) {
    if (y[k] == 0.0) continue;
    const double w = y[k] / (conv[k] * conv[k]);
    for (Eigen::Index i = 0; i < ni; ++i) {
      const auto idx = static_cast<std::ptrdiff_t>(k) - i;
      xi(i) = (idx >= 0 && idx < ni) ? x[static_cast<std::size_t>(idx)] : 0.0;
    }
    d.P.noalias() += (4.0 * w) * xi * xi.transpose();
  }
  d.H = d.P + d.Q;
  return d;
}

Observations pad_to_odd(std::vector<double> raw) {
  if (raw.empty()) throw DataError("y must not be empty");
  if (raw.size() % 2 == 0) raw.push_back(0.0);
  return Observations(std::move(raw));
}

std::pair<Observations, double> normalize_probability(const Observations& y) {
  const double scale = y.sum();
  std::vector<double> v(y.values().begin(), y.values().end());
  for (double& e : v) e /= scale;
  return {Observations(std::move(v)), scale};
}

}  // namespace deautoconv
