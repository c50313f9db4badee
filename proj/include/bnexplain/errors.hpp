#pragma once

#include <stdexcept>
#include <string>

namespace bnexplain {

/// Malformed input: unknown names, bad states, broken invariants, parse failures.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arithmetic that has no meaningful result (x/0, normalizing an all-zero table).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A size or time guard was exceeded.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bnexplain
