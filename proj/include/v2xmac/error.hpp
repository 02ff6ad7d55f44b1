#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace v2xmac {

enum class ErrorCode {
  InvalidParameter,
  NonStochasticMatrix,
  NoConvergence,
  UnknownChainKind,
  DegenerateTransmitProbability,
  DegenerateQueue,
  SaturatedQueue,
  InvalidMass,
  ChannelSaturated,
  NoFixedPoint,
  ResourceExhaustion,
  ModelValidity,
  NoTransmitter,
  EmptySystem,
  DegenerateConditional,
  InvalidDuration,
  ConfigParseError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI exit codes, tests) can dispatch without string matching.
class ModelError : public std::runtime_error {
 public:
  ModelError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw ModelError(code, what); }

}  // namespace v2xmac
