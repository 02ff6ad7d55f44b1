#include "v2xmac/error.hpp"

namespace v2xmac {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NonStochasticMatrix: return "NonStochasticMatrix";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::UnknownChainKind: return "UnknownChainKind";
    case ErrorCode::DegenerateTransmitProbability: return "DegenerateTransmitProbability";
    case ErrorCode::DegenerateQueue: return "DegenerateQueue";
    case ErrorCode::SaturatedQueue: return "SaturatedQueue";
    case ErrorCode::InvalidMass: return "InvalidMass";
    case ErrorCode::ChannelSaturated: return "ChannelSaturated";
    case ErrorCode::NoFixedPoint: return "NoFixedPoint";
    case ErrorCode::ResourceExhaustion: return "ResourceExhaustion";
    case ErrorCode::ModelValidity: return "ModelValidity";
    case ErrorCode::NoTransmitter: return "NoTransmitter";
    case ErrorCode::EmptySystem: return "EmptySystem";
    case ErrorCode::DegenerateConditional: return "DegenerateConditional";
    case ErrorCode::InvalidDuration: return "InvalidDuration";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
  }
  return "Unknown";
}

}  // namespace v2xmac
