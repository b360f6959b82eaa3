// Compiled with -mavx2 -mfma. Nothing here may run before dispatch has
// confirmed CPU support.

#include "deautoconv/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cassert>
#include <cstddef>

namespace deautoconv::kernels {
namespace {

// dst[0..len) += a * src[0..len)
inline void axpy(double a, const double* src, double* dst, std::size_t len) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    __m256d d = _mm256_loadu_pd(dst + i);
    d = _mm256_fmadd_pd(va, _mm256_loadu_pd(src + i), d);
    _mm256_storeu_pd(dst + i, d);
  }
  for (; i < len; ++i) dst[i] += a * src[i];
}

void autoconvolve_avx2(std::span<const double> x, std::span<double> out) {
  const std::size_t n = x.size();
  assert(out.size() == 2 * n - 1);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) axpy(x[i], x.data(), out.data() + i, n);
}

void correlate_avx2(std::span<const double> x, std::span<const double> r,
                    std::span<double> out) {
  const std::size_t n = x.size();
  assert(r.size() == 2 * n - 1 && out.size() == n);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t l = 0; l < n; ++l) axpy(x[l], r.data() + l, out.data(), n);
}

}  // namespace

namespace detail {
const KernelTable& avx2() {
  static const KernelTable table{"avx2", &autoconvolve_avx2, &correlate_avx2};
  return table;
}
}  // namespace detail

}  // namespace deautoconv::kernels
