#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace isomix {

enum class ErrorKind {
  DegenerateVolumes,
  SingularBasis,
  NonpositiveDensity,
  NewtonDivergence,
  ThresholdViolation,
  ConstraintViolation,
  DegenerateClosure,
  CflViolation,
  ThresholdBreach,
  SingularBlock,
  PicardDivergence,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The message is
/// prefixed with the rule name so that CLI output names the violated rule.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when the total density reaches the guard band around one of the
/// thresholds. Carries enough context to report where the run broke down.
class ThresholdBreachError : public Error {
 public:
  enum class Side { Lower, Upper };

  ThresholdBreachError(std::size_t cell, double value, Side side, const std::string& what);

  std::size_t cell() const noexcept { return cell_; }
  double value() const noexcept { return value_; }
  Side side() const noexcept { return side_; }

 private:
  std::size_t cell_;
  double value_;
  Side side_;
};

}  // namespace isomix
