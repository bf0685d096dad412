#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "citywall/core/identifiers.hpp"
#include "citywall/core/pose.hpp"
#include "citywall/core/projection.hpp"
#include "citywall/sync/protocol.hpp"

namespace citywall::sync {

// Receives the server's messages for one connected device. deliver() is
// called with the room lock held, in room application order; it must not
// block and must not call back into the SyncServer.
class MessageSink {
 public:
  virtual ~MessageSink() = default;
  virtual void deliver(const ServerMessage& message) = 0;
};

struct JoinSnapshot {
  Role role = Role::Auxiliary;
  std::optional<std::string> config_id;
  std::optional<ProjectionMatrix> projection;
  std::optional<CameraPose> pose;
};

// Read-only view of one room, for diagnostics and the harness.
struct RoomSummary {
  bool exists = false;
  std::vector<std::string> devices;  // sorted
  std::optional<std::string> main_device;
  bool main_connected = false;
  std::optional<std::string> active_config;
  std::optional<std::uint64_t> latest_seq;
  std::vector<std::string> library;  // sorted config ids
};

// Room registry and authority rules. Mutations of one room are serialized by
// a per-room mutex; different rooms proceed in parallel.
//
// Main role: while a configuration is active its main view's device is main;
// before that, the first device to join a fresh room is. A room whose main
// device has left keeps that id and stays frozen until it rejoins.
class SyncServer {
 public:
  explicit SyncServer(std::vector<ViewConfiguration> default_library = {});
  ~SyncServer();

  SyncServer(const SyncServer&) = delete;
  SyncServer& operator=(const SyncServer&) = delete;

  // Throws DuplicateDevice when the id is already connected in the room.
  JoinSnapshot join(const RoomId& room, const DeviceId& device,
                    std::shared_ptr<MessageSink> sink);

  // Throws NotMain or UnknownConfig; on success every connected device gets
  // exactly one Configuration message.
  void switch_config(const RoomId& room, const DeviceId& requester,
                     const std::string& config_id);

  // Throws NotMain. Returns false when the pose was stale and dropped.
  bool publish_pose(const RoomId& room, const DeviceId& requester,
                    const CameraPose& pose);

  // No-op for devices that are not members.
  void leave(const RoomId& room, const DeviceId& device);

  // Replaces the room's library (kept for rooms created later too). Throws
  // InvalidConfig on duplicate config ids.
  void load_config_library(const RoomId& room, std::vector<ViewConfiguration> configs);
  // Validates every document first; throws InvalidConfig with diagnostics.
  void load_config_library(const RoomId& room, const std::vector<ConfigDocument>& docs);

  RoomSummary summary(const RoomId& room) const;
  std::vector<std::string> default_config_ids() const;
  std::size_t room_count() const;

 private:
  struct Room;
  using Library = std::map<std::string, ViewConfiguration>;

  static Library make_library(std::vector<ViewConfiguration> configs);
  std::shared_ptr<Room> find_room(const RoomId& room) const;
  std::shared_ptr<Room> acquire_room(const RoomId& room);
  void retire_if_empty(const RoomId& id, const std::shared_ptr<Room>& room);

  mutable std::mutex registry_mutex_;
  std::unordered_map<RoomId, std::shared_ptr<Room>> rooms_;
  Library default_library_;
  std::unordered_map<RoomId, Library> room_libraries_;
};

}  // namespace citywall::sync
