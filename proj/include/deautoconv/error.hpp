#pragma once

#include <stdexcept>
#include <string>

namespace deautoconv {

// Caller misuse: mismatched dimensions, off-simplex input, bad flags.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Input data that cannot be accepted (negative, empty, all zero, unparsable).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A quantity is undefined at the given point, e.g. y_k > 0 against (x*x)_k = 0.
class NumericError : public std::domain_error {
 public:
  explicit NumericError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace deautoconv
