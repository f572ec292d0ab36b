#ifndef COMPAGENCY_ERROR_HPP_
#define COMPAGENCY_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace compagency {

enum class ErrorKind {
  NonPositiveEntry,
  DimensionMismatch,
  NonFinite,
  InvalidLabels,
  InvalidWeights,
  SpaceMismatch,
  LengthMismatch,
  EmptyOrFullEvent,
  IndexOutOfRange,
  NotAPoolWitness,
  IdentityMismatch,
  ParamOutOfRange,
  DegenerateWeights,
  NotFound,
  WeightTooConcentrated,
  DistinctnessFailure,
  PreconditionViolation,
  UniformParent,
  NotStrictlyUnanimous,
  TiltsNotCentered,
  DbetaNotZeroSum,
  DbetaInconsistent,
  BudgetViolated,
  DegenerateSpan,
  ParseError,
  ConfigParse,
  UnknownSuite,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::InvalidLabels: return "InvalidLabels";
    case ErrorKind::InvalidWeights: return "InvalidWeights";
    case ErrorKind::SpaceMismatch: return "SpaceMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyOrFullEvent: return "EmptyOrFullEvent";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NotAPoolWitness: return "NotAPoolWitness";
    case ErrorKind::IdentityMismatch: return "IdentityMismatch";
    case ErrorKind::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorKind::DegenerateWeights: return "DegenerateWeights";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::WeightTooConcentrated: return "WeightTooConcentrated";
    case ErrorKind::DistinctnessFailure: return "DistinctnessFailure";
    case ErrorKind::PreconditionViolation: return "PreconditionViolation";
    case ErrorKind::UniformParent: return "UniformParent";
    case ErrorKind::NotStrictlyUnanimous: return "NotStrictlyUnanimous";
    case ErrorKind::TiltsNotCentered: return "TiltsNotCentered";
    case ErrorKind::DbetaNotZeroSum: return "DbetaNotZeroSum";
    case ErrorKind::DbetaInconsistent: return "DbetaInconsistent";
    case ErrorKind::BudgetViolated: return "BudgetViolated";
    case ErrorKind::DegenerateSpan: return "DegenerateSpan";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ConfigParse: return "ConfigParse";
    case ErrorKind::UnknownSuite: return "UnknownSuite";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (and the CLI's exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace compagency

#endif  // COMPAGENCY_ERROR_HPP_
