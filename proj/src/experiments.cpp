#include "deautoconv/experiments.hpp"

#include "deautoconv/kernels.hpp"
#include "deautoconv/random.hpp"

namespace deautoconv {

SimulatedData simulate_exact(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(m + 1);
  for (double& v : x) v = rng.uniform(1.0, 11.0);
  SimulatedData out;
  out.name = "exact-m" + std::to_string(m) + "-seed" + std::to_string(seed);
  // Scalar reference kernel so the file does not depend on the CPU it was made on.
  out.y.resize(2 * m + 1);
  kernels::scalar().autoconvolve(x, out.y);
  out.x_true = std::move(x);
  return out;
}

SimulatedData simulate_random(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  SimulatedData out;
  out.name = "random-m" + std::to_string(m) + "-seed" + std::to_string(seed);
  out.y.resize(2 * m + 1);
  for (double& v : out.y) v = rng.uniform(0.1, 2.0);
  return out;
}

}  // namespace deautoconv
