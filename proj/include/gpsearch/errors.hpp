#pragma once

#include <stdexcept>
#include <string>

namespace gpsearch {

/// Raised when an argument falls outside the domain of an operation.
class DomainError : public std::domain_error {
 public:
  DomainError(std::string field, const std::string& what)
      : std::domain_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Raised when an integration cannot continue (step-size underflow,
/// non-finite state, solution leaving its admissible range).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double time_reached)
      : std::runtime_error(what + " (t = " + std::to_string(time_reached) + ")"),
        time_reached_(time_reached) {}

  double time_reached() const noexcept { return time_reached_; }

 private:
  double time_reached_;
};

}  // namespace gpsearch
