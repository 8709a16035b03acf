#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace roidet {

enum class ErrorCode {
  Validation,
  MalformedPolygon,
  EmptyGrid,
  GeometryMismatch,
  DuplicateId,
  UnknownLabel,
  ParseError,
  DegenerateSplit,
  NumericalError,
  DegenerateTrainingSet,
  IncompleteScores,
  DuplicatePatch,
  InvalidDistribution,
  EmptyInput,
  DivisionByZero,
  InvalidCounts,
  InvalidInput,
  MissingPrediction,
  InsufficientRepeats,
  EmptySelection,
  NoCluster,
  InvalidBoundary,
  Io,
};

// Coarse grouping used for CLI exit codes.
enum class ErrorCategory { Validation, Io, Degenerate };

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::MalformedPolygon: return "MalformedPolygon";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::GeometryMismatch: return "GeometryMismatch";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::NumericalError: return "NumericalError";
    case ErrorCode::DegenerateTrainingSet: return "DegenerateTrainingSet";
    case ErrorCode::IncompleteScores: return "IncompleteScores";
    case ErrorCode::DuplicatePatch: return "DuplicatePatch";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::InvalidCounts: return "InvalidCounts";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::MissingPrediction: return "MissingPrediction";
    case ErrorCode::InsufficientRepeats: return "InsufficientRepeats";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::NoCluster: return "NoCluster";
    case ErrorCode::InvalidBoundary: return "InvalidBoundary";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

constexpr ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
      return ErrorCategory::Io;
    case ErrorCode::EmptyGrid:
    case ErrorCode::DegenerateSplit:
    case ErrorCode::DegenerateTrainingSet:
    case ErrorCode::EmptySelection:
    case ErrorCode::NoCluster:
    case ErrorCode::InsufficientRepeats:
      return ErrorCategory::Degenerate;
    default:
      return ErrorCategory::Validation;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace roidet
