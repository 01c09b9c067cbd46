#include "isomix/errors.hpp"

namespace isomix {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DegenerateVolumes: return "DegenerateVolumes";
    case ErrorKind::SingularBasis: return "SingularBasis";
    case ErrorKind::NonpositiveDensity: return "NonpositiveDensity";
    case ErrorKind::NewtonDivergence: return "NewtonDivergence";
    case ErrorKind::ThresholdViolation: return "ThresholdViolation";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::DegenerateClosure: return "DegenerateClosure";
    case ErrorKind::CflViolation: return "CflViolation";
    case ErrorKind::ThresholdBreach: return "ThresholdBreach";
    case ErrorKind::SingularBlock: return "SingularBlock";
    case ErrorKind::PicardDivergence: return "PicardDivergence";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

ThresholdBreachError::ThresholdBreachError(std::size_t cell, double value, Side side,
                                           const std::string& what)
    : Error(ErrorKind::ThresholdBreach, what), cell_(cell), value_(value), side_(side) {}

}  // namespace isomix
