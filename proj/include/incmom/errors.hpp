#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace incmom {

enum class ErrorCode {
  InvalidArgument,
  QuantileIndexZero,
  DegenerateConditional,
  MethodMissing,
  PMismatch,
  NonPositiveDensity,
  NonPositiveObservation,
  ThresholdMismatch,
  InsufficientData,
  FileNotFound,
  MissingColumn,
  EmptyGroup,
  NonPositiveValues,
  UnparseableValue,
  GroupCountNotTwo,
};

// Input errors come from bad data or arguments; numeric errors from a
// well-formed input the estimators cannot handle. The CLI maps them to
// distinct exit codes.
enum class ErrorKind { Input, Numeric };

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::QuantileIndexZero: return "QuantileIndexZero";
    case ErrorCode::DegenerateConditional: return "DegenerateConditional";
    case ErrorCode::MethodMissing: return "MethodMissing";
    case ErrorCode::PMismatch: return "PMismatch";
    case ErrorCode::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorCode::NonPositiveObservation: return "NonPositiveObservation";
    case ErrorCode::ThresholdMismatch: return "ThresholdMismatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::NonPositiveValues: return "NonPositiveValues";
    case ErrorCode::UnparseableValue: return "UnparseableValue";
    case ErrorCode::GroupCountNotTwo: return "GroupCountNotTwo";
  }
  return "Unknown";
}

constexpr ErrorKind kind_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::QuantileIndexZero:
    case ErrorCode::DegenerateConditional:
    case ErrorCode::NonPositiveDensity:
    case ErrorCode::InsufficientData:
      return ErrorKind::Numeric;
    default:
      return ErrorKind::Input;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace incmom
