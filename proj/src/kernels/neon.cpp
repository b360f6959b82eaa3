// aarch64 only; NEON is part of the base ISA there so no runtime probe is
// needed beyond compiling this file.

#include "deautoconv/kernels.hpp"

#include <arm_neon.h>

#include <algorithm>
#include <cassert>
#include <cstddef>

namespace deautoconv::kernels {
namespace {

inline void axpy(double a, const double* src, double* dst, std::size_t len) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    float64x2_t d = vld1q_f64(dst + i);
    d = vfmaq_f64(d, va, vld1q_f64(src + i));
    vst1q_f64(dst + i, d);
  }
  for (; i < len; ++i) dst[i] += a * src[i];
}

void autoconvolve_neon(std::span<const double> x, std::span<double> out) {
  const std::size_t n = x.size();
  assert(out.size() == 2 * n - 1);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) axpy(x[i], x.data(), out.data() + i, n);
}

void correlate_neon(std::span<const double> x, std::span<const double> r,
                    std::span<double> out) {
  const std::size_t n = x.size();
  assert(r.size() == 2 * n - 1 && out.size() == n);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t l = 0; l < n; ++l) axpy(x[l], r.data() + l, out.data(), n);
}

}  // namespace

namespace detail {
const KernelTable& neon() {
  static const KernelTable table{"neon", &autoconvolve_neon, &correlate_neon};
  return table;
}
}  // namespace detail

}  // namespace deautoconv::kernels
