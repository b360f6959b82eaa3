#include "deautoconv/kernels.hpp"

#include <cassert>
#include <cstddef>

namespace deautoconv::kernels {
namespace {

void autoconvolve_scalar(std::span<const double> x, std::span<double> out) {
  const std::size_t n = x.size();
  assert(out.size() == 2 * n - 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    // j ranges over indices where both x[j] and x[k-j] exist.
    const std::size_t lo = k >= n ? k - (n - 1) : 0;
    const std::size_t hi = k < n ? k : n - 1;
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += x[k - j] * x[j];
    out[k] = acc;
  }
}

void correlate_scalar(std::span<const double> x, std::span<const double> r,
                      std::span<double> out) {
  const std::size_t n = x.size();
  assert(r.size() == 2 * n - 1 && out.size() == n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t l = 0; l < n; ++l) acc += x[l] * r[l + j];
    out[j] = acc;
  }
}

}  // namespace

const KernelTable& scalar() {
  static const KernelTable table{"scalar", &autoconvolve_scalar, &correlate_scalar};
  return table;
}

}  // namespace deautoconv::kernels
