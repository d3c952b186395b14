#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blab {

/// Raised when a field carries NaN or Inf. Names the first offending index.
class NonFiniteError : public std::domain_error {
 public:
  NonFiniteError(const std::string& what_field, std::size_t index)
      : std::domain_error(what_field + ": non-finite value at index " +
                          std::to_string(index)),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Raised when a step would violate the advective CFL restriction.
class CflViolation : public std::runtime_error {
 public:
  CflViolation(double max_velocity, double dt, double dt_limit)
      : std::runtime_error("CFL violation: max|v| = " + std::to_string(max_velocity) +
                           ", dt = " + std::to_string(dt) +
                           " exceeds limit " + std::to_string(dt_limit)),
        max_velocity_(max_velocity) {}

  double max_velocity() const noexcept { return max_velocity_; }

 private:
  double max_velocity_;
};

}  // namespace blab
