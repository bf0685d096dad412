#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace citywall {

enum class ErrorCode {
  BadIdentifier,
  InvariantViolation,
  EyeOnScreenPlane,
  BadClipRange,
  CountMismatch,
  BadAngles,
  ParseError,
  UnsupportedProfile,
  AngleOutOfRange,
  ValidationError,
  UnresolvedLink,
  DuplicateDevice,
  NotMain,
  UnknownConfig,
  InvalidConfig,
  NotJoined,
  AlreadyJoined,
  ScenarioError,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library surfaces as this exception. `details` carries
// the individual violations for ValidationError / InvalidConfig.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::vector<std::string> details = {});

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

}  // namespace citywall
