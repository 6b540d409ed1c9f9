#include "episignal/error.hpp"

namespace episignal {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyName: return "EmptyName";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DuplicateCounty: return "DuplicateCounty";
    case ErrorKind::MissingNameColumn: return "MissingNameColumn";
    case ErrorKind::DegenerateColumn: return "DegenerateColumn";
    case ErrorKind::EmptySeries: return "EmptySeries";
    case ErrorKind::EmptySlice: return "EmptySlice";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::SingleCluster: return "SingleCluster";
    case ErrorKind::MissingSeries: return "MissingSeries";
    case ErrorKind::NonPositive: return "NonPositive";
    case ErrorKind::EmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorKind::SkippedBelowThreshold: return "SkippedBelowThreshold";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::NonInvertibleParams: return "NonInvertibleParams";
    case ErrorKind::DegenerateSeries: return "DegenerateSeries";
    case ErrorKind::AllFitsFailed: return "AllFitsFailed";
    case ErrorKind::HorizonZero: return "HorizonZero";
    case ErrorKind::MissingCluster: return "MissingCluster";
    case ErrorKind::HoldoutTooLarge: return "HoldoutTooLarge";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace episignal
