#pragma once

#include <stdexcept>
#include <string>

namespace hwb {

// Bad input: violated preconditions, malformed configs, grid mismatches.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The numerics gave up: non-convergence, NaN, unresolved blow-up.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace hwb
