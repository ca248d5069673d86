#include "berman/error.hpp"

namespace berman {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::NotUnitDiagonal: return "NotUnitDiagonal";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::AsymmetryTooLarge: return "AsymmetryTooLarge";
    case ErrorKind::InvalidDelta: return "InvalidDelta";
    case ErrorKind::WrongRegime: return "WrongRegime";
    case ErrorKind::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DimTooLarge: return "DimTooLarge";
    case ErrorKind::TolUnreachable: return "TolUnreachable";
    case ErrorKind::BadSpec: return "BadSpec";
    case ErrorKind::TruncationTooDeep: return "TruncationTooDeep";
    case ErrorKind::ScheduleInvalid: return "ScheduleInvalid";
    case ErrorKind::EvaluationDomain: return "EvaluationDomain";
    case ErrorKind::BadEta: return "BadEta";
  }
  return "Unknown";
}

}  // namespace berman
