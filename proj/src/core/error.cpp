#include "citywall/core/error.hpp"

namespace citywall {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadIdentifier: return "BadIdentifier";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::EyeOnScreenPlane: return "EyeOnScreenPlane";
    case ErrorCode::BadClipRange: return "BadClipRange";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::BadAngles: return "BadAngles";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedProfile: return "UnsupportedProfile";
    case ErrorCode::AngleOutOfRange: return "AngleOutOfRange";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnresolvedLink: return "UnresolvedLink";
    case ErrorCode::DuplicateDevice: return "DuplicateDevice";
    case ErrorCode::NotMain: return "NotMain";
    case ErrorCode::UnknownConfig: return "UnknownConfig";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NotJoined: return "NotJoined";
    case ErrorCode::AlreadyJoined: return "AlreadyJoined";
    case ErrorCode::ScenarioError: return "ScenarioError";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message,
                    const std::vector<std::string>& details) {
  std::string text{to_string(code)};
  text += ": ";
  text += message;
  for (const auto& d : details) {
    text += "\n  - ";
    text += d;
  }
  return text;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::vector<std::string> details)
    : std::runtime_error(compose(code, message, details)),
      code_(code),
      details_(std::move(details)) {}

}  // namespace citywall
