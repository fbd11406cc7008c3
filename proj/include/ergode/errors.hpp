#pragma once

#include <stdexcept>
#include <string>

namespace ergode {

/// Invalid descriptor, parameter, or point/system pairing.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A measure/observable (or system/subset) pairing with no implemented route.
class Unsupported : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An enumeration or sampling budget ran out before a result was reached.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace ergode
