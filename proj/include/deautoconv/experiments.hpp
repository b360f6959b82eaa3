#pragma once

// Synthetic data sets for the two experiment protocols: exact-model data
// y = x*x with x ~ U[1, 11]^{m+1}, and random data y ~ U[0.1, 2]^{2m+1}.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace deautoconv {

struct SimulatedData {
  std::string name;
  std::vector<double> y;
  std::optional<std::vector<double>> x_true;
};

SimulatedData simulate_exact(std::size_t m, std::uint64_t seed);
SimulatedData simulate_random(std::size_t m, std::uint64_t seed);

}  // namespace deautoconv
