#pragma once

// Inner loops shared by the objective, gradient and multiplicative update.
//
// Every kernel has a scalar reference implementation written straight from
// the defining sums. ISA variants (AVX2+FMA on x86-64, NEON on aarch64) are
// compiled into separate translation units and selected once at runtime.
// Variants reorder the floating-point additions, so they agree with the
// reference to round-off, not bitwise.

#include <span>
#include <string_view>
#include <vector>

namespace deautoconv::kernels {

struct KernelTable {
  std::string_view name;

  // out[k] = sum_j x[k-j] * x[j], k = 0..2n-2, with n = x.size().
  // out.size() must be 2n-1.
  void (*autoconvolve)(std::span<const double> x, std::span<double> out);

  // out[j] = sum_l x[l] * r[l+j], j = 0..n-1, with n = x.size().
  // r.size() must be 2n-1 and every r entry finite.
  void (*correlate)(std::span<const double> x, std::span<const double> r,
                    std::span<double> out);
};

const KernelTable& scalar();

// Every variant compiled in and supported by the running CPU, scalar first.
std::vector<const KernelTable*> available();

// The variant used by the library. Chosen on first call: the environment
// variable DEAUTOCONV_KERNEL (a table name) wins if it names an available
// variant, otherwise the last entry of available().
const KernelTable& active();

// Forces the active table; returns false if no available table has that name.
bool select(std::string_view name);

namespace detail {
// Defined only in the ISA translation units that are compiled in.
const KernelTable& avx2();
const KernelTable& neon();
}  // namespace detail

}  // namespace deautoconv::kernels
