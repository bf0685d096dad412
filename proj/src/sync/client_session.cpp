#include "citywall/sync/client_session.hpp"

namespace citywall::sync {

ClientSession::Outcome ClientSession::apply_pose(const CameraPose& pose) {
  if (guard_poses_ && pose_ && pose.seq() <= last_seq_) {
    return Outcome::StaleRejected;
  }
  pose_ = pose;
  last_seq_ = pose.seq();
  return Outcome::Applied;
}

ClientSession::Outcome ClientSession::apply(const ServerMessage& message) {
  if (const auto* m = std::get_if<server::SelfJoined>(&message)) {
    joined_ = true;
    role_ = m->role;
    config_id_ = m->config_id;
    projection_ = m->projection;
    if (m->pose) apply_pose(*m->pose);
    return Outcome::Applied;
  }
  if (const auto* m = std::get_if<server::Error>(&message)) {
    last_error_ = m->code;
    return Outcome::Error;
  }
  if (!joined_) return Outcome::NotJoined;

  if (const auto* m = std::get_if<server::Configuration>(&message)) {
    role_ = m->role;
    config_id_ = m->config_id;
    projection_ = m->projection;
    return Outcome::Applied;
  }
  if (const auto* m = std::get_if<server::Pose>(&message)) {
    return apply_pose(m->pose);
  }
  return Outcome::Ignored;
}

ClientSession::Outcome ClientSession::apply_local_pose(const CameraPose& pose) {
  return apply_pose(pose);
}

}  // namespace citywall::sync
