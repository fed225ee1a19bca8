#pragma once

#include <stdexcept>
#include <string>

namespace cpsense {

/// Failure classes raised by the library. The CLI maps these onto exit codes.
enum class ErrorCode {
  NotCoprime,
  OrderViolation,
  NonPositiveParameter,
  LengthMismatch,
  WindowTooWide,
  LagWindowMismatch,
  AllLagsUncovered,
  UncoveredLag,
  FrequencyOutOfBand,
  SymbolRateTooHigh,
  SweepOutOfBand,
  ZeroSignalPower,
  EmptyTrials,
  InvalidConfig,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cpsense
