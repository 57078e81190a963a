#ifndef CBS_ERROR_HPP
#define CBS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbs {

enum class ErrorCode {
  DimensionNotDyadic,
  IndexOutOfRange,
  NonpositiveAmplitude,
  NonpositiveBudget,
  NegativeNoise,
  BudgetExhausted,
  NormViolation,
  DimensionMismatch,
  BudgetTooSmall,
  InvalidInterval,
  InvalidTarget,
  InvalidConfig,
  TrialFailed,
  MalformedCsv,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionNotDyadic: return "DimensionNotDyadic";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonpositiveAmplitude: return "NonpositiveAmplitude";
    case ErrorCode::NonpositiveBudget: return "NonpositiveBudget";
    case ErrorCode::NegativeNoise: return "NegativeNoise";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::NormViolation: return "NormViolation";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::TrialFailed: return "TrialFailed";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace cbs

#endif // CBS_ERROR_HPP
