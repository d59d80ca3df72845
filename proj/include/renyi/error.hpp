#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace renyi {

enum class ErrorKind {
  NotHermitian,
  NotPSD,
  NotUnitTrace,
  DimensionMismatch,
  UnknownLabel,
  InvalidDims,
  NegativeEigenvalue,
  InvalidRank,
  NotTracePreserving,
  AlphaOutOfRange,
  MissingRegister,
  OptimizerDiverged,
  SupportIncompatible,
  FidelityPreconditionFailed,
  RateOutOfRange,
  TooLarge,
  BoundViolation,
  InvalidArgument,
  ParseError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::NotUnitTrace: return "NotUnitTrace";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::InvalidDims: return "InvalidDims";
    case ErrorKind::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorKind::InvalidRank: return "InvalidRank";
    case ErrorKind::NotTracePreserving: return "NotTracePreserving";
    case ErrorKind::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorKind::MissingRegister: return "MissingRegister";
    case ErrorKind::OptimizerDiverged: return "OptimizerDiverged";
    case ErrorKind::SupportIncompatible: return "SupportIncompatible";
    case ErrorKind::FidelityPreconditionFailed: return "FidelityPreconditionFailed";
    case ErrorKind::RateOutOfRange: return "RateOutOfRange";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::BoundViolation: return "BoundViolation";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library. The message always starts with the
/// kind name so command-line users see which invariant broke.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Validation failures map to CLI exit code 3; everything else is a usage problem.
  bool is_numerical() const noexcept {
    return kind_ != ErrorKind::ParseError && kind_ != ErrorKind::InvalidArgument &&
           kind_ != ErrorKind::UnknownLabel;
  }

 private:
  ErrorKind kind_;
};

}  // namespace renyi
