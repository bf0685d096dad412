#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "citywall/sync/protocol.hpp"

namespace citywall::sync {

// What a display client does with server messages: remember its role, the
// active configuration and its own matrix, and apply poses newer than the
// last applied one.
class ClientSession {
 public:
  enum class Outcome { Applied, StaleRejected, NotJoined, Ignored, Error };

  // `guard_poses` = false disables the local staleness check (negative
  // control for the harness only).
  explicit ClientSession(bool guard_poses = true) : guard_poses_(guard_poses) {}

  Outcome apply(const ServerMessage& message);

  // Main-side bookkeeping: a pose this device published itself.
  Outcome apply_local_pose(const CameraPose& pose);

  bool joined() const noexcept { return joined_; }
  Role role() const noexcept { return role_; }
  const std::optional<std::string>& config_id() const noexcept { return config_id_; }
  const std::optional<Matrix16>& projection() const noexcept { return projection_; }
  const std::optional<CameraPose>& pose() const noexcept { return pose_; }
  std::uint64_t last_applied_seq() const noexcept { return last_seq_; }
  const std::optional<std::string>& last_error() const noexcept { return last_error_; }

 private:
  Outcome apply_pose(const CameraPose& pose);

  bool guard_poses_;
  bool joined_ = false;
  Role role_ = Role::Auxiliary;
  std::optional<std::string> config_id_;
  std::optional<Matrix16> projection_;
  std::optional<CameraPose> pose_;
  std::uint64_t last_seq_ = 0;
  std::optional<std::string> last_error_;
};

}  // namespace citywall::sync
