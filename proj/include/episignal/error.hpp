#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace episignal {

enum class ErrorKind {
  EmptyName,
  ParseError,
  DuplicateCounty,
  MissingNameColumn,
  DegenerateColumn,
  EmptySeries,
  EmptySlice,
  KTooLarge,
  EmptyMatrix,
  InvalidArgument,
  TooFewPoints,
  SingleCluster,
  MissingSeries,
  NonPositive,
  EmptyAfterFilter,
  SkippedBelowThreshold,
  TooShort,
  ZeroVariance,
  NumericalBreakdown,
  NonInvertibleParams,
  DegenerateSeries,
  AllFitsFailed,
  HorizonZero,
  MissingCluster,
  HoldoutTooLarge,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// All library failures carry a machine-checkable kind next to the message.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace episignal
