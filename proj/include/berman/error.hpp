#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace berman {

enum class ErrorKind {
  NotSquare,
  NotUnitDiagonal,
  NotPSD,
  AsymmetryTooLarge,
  InvalidDelta,
  WrongRegime,
  ParamOutOfRange,
  DimensionMismatch,
  DimTooLarge,
  TolUnreachable,
  BadSpec,
  TruncationTooDeep,
  ScheduleInvalid,
  EvaluationDomain,
  BadEta,
};

std::string_view to_string(ErrorKind kind);

/// Raised for every mathematical-domain failure in the library. The CLI maps
/// these to exit code 3.
class MathError : public std::runtime_error {
 public:
  MathError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace berman
