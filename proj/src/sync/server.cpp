#include "citywall/sync/server.hpp"

#include <algorithm>

#include "citywall/core/error.hpp"
#include "citywall/frustum/configuration.hpp"

namespace citywall::sync {

struct SyncServer::Room {
  Room(RoomId room_id, Library lib) : id(std::move(room_id)), library(std::move(lib)) {}

  std::mutex mutex;
  bool retired = false;
  RoomId id;
  std::map<DeviceId, std::shared_ptr<MessageSink>> devices;
  Library library;
  std::optional<std::string> active;
  std::optional<DeviceId> main_device;
  std::optional<CameraPose> latest_pose;

  const ViewConfiguration* active_config() const {
    if (!active) return nullptr;
    auto it = library.find(*active);
    return it == library.end() ? nullptr : &it->second;
  }

  Role role_of(const DeviceId& device) const {
    return main_device && *main_device == device ? Role::Main : Role::Auxiliary;
  }

  bool is_connected_main(const DeviceId& device) const {
    return devices.count(device) != 0 && role_of(device) == Role::Main;
  }

  server::Configuration configuration_for(const DeviceId& device) const {
    server::Configuration msg;
    msg.role = role_of(device);
    if (const auto* config = active_config()) {
      msg.config_id = config->id();
      if (const auto* view = config->find(device)) {
        msg.projection = view->projection.column_major();
      }
    }
    return msg;
  }

  void broadcast_configuration() {
    for (const auto& [device, sink] : devices) {
      sink->deliver(configuration_for(device));
    }
  }

  void broadcast_except(const DeviceId& skip, const ServerMessage& msg) {
    for (const auto& [device, sink] : devices) {
      if (device != skip) sink->deliver(msg);
    }
  }
};

SyncServer::SyncServer(std::vector<ViewConfiguration> default_library)
    : default_library_(make_library(std::move(default_library))) {}

SyncServer::~SyncServer() = default;

SyncServer::Library SyncServer::make_library(std::vector<ViewConfiguration> configs) {
  Library library;
  std::vector<std::string> duplicates;
  for (auto& config : configs) {
    const std::string id = config.id();
    if (!library.emplace(id, std::move(config)).second) {
      duplicates.push_back("configId '" + id + "' appears more than once");
    }
  }
  if (!duplicates.empty()) {
    throw Error(ErrorCode::InvalidConfig, "configuration library is invalid",
                std::move(duplicates));
  }
  return library;
}

std::shared_ptr<SyncServer::Room> SyncServer::find_room(const RoomId& room) const {
  std::lock_guard lock(registry_mutex_);
  auto it = rooms_.find(room);
  return it == rooms_.end() ? nullptr : it->second;
}

std::shared_ptr<SyncServer::Room> SyncServer::acquire_room(const RoomId& room) {
  std::lock_guard lock(registry_mutex_);
  auto& slot = rooms_[room];
  if (!slot) {
    auto lib = room_libraries_.find(room);
    slot = std::make_shared<Room>(
        room, lib == room_libraries_.end() ? default_library_ : lib->second);
  }
  return slot;
}

void SyncServer::retire_if_empty(const RoomId& id, const std::shared_ptr<Room>& room) {
  std::lock_guard lock(registry_mutex_);
  auto it = rooms_.find(id);
  if (it != rooms_.end() && it->second == room) rooms_.erase(it);
}

JoinSnapshot SyncServer::join(const RoomId& room_id, const DeviceId& device,
                              std::shared_ptr<MessageSink> sink) {
  for (;;) {
    auto room = acquire_room(room_id);
    std::unique_lock lock(room->mutex);
    if (room->retired) {
      lock.unlock();
      retire_if_empty(room_id, room);
      continue;
    }
    if (room->devices.count(device) != 0) {
      throw Error(ErrorCode::DuplicateDevice,
                  "device '" + device.str() + "' is already connected to room '" +
                      room_id.str() + "'");
    }
    if (!room->main_device) room->main_device = device;

    JoinSnapshot snapshot;
    snapshot.role = room->role_of(device);
    if (const auto* config = room->active_config()) {
      snapshot.config_id = config->id();
      if (const auto* view = config->find(device)) snapshot.projection = view->projection;
    }
    snapshot.pose = room->latest_pose;

    // The snapshot goes out under the room lock so it precedes any fan-out
    // to the new device.
    server::SelfJoined joined;
    joined.role = snapshot.role;
    joined.config_id = snapshot.config_id;
    if (snapshot.projection) joined.projection = snapshot.projection->column_major();
    joined.pose = snapshot.pose;
    sink->deliver(joined);

    room->broadcast_except(device, server::DeviceJoined{device.str()});
    room->devices.emplace(device, std::move(sink));
    return snapshot;
  }
}

void SyncServer::switch_config(const RoomId& room_id, const DeviceId& requester,
                               const std::string& config_id) {
  auto room = find_room(room_id);
  if (!room) {
    throw Error(ErrorCode::NotMain, "device '" + requester.str() + "' is not in room");
  }
  std::lock_guard lock(room->mutex);
  if (room->retired || !room->is_connected_main(requester)) {
    throw Error(ErrorCode::NotMain,
                "device '" + requester.str() + "' does not hold the main role");
  }
  auto it = room->library.find(config_id);
  if (it == room->library.end()) {
    throw Error(ErrorCode::UnknownConfig, "no configuration '" + config_id + "'");
  }
  room->active = config_id;
  room->main_device = it->second.main_view().device_id;
  room->broadcast_configuration();
}

bool SyncServer::publish_pose(const RoomId& room_id, const DeviceId& requester,
                              const CameraPose& pose) {
  auto room = find_room(room_id);
  if (!room) {
    throw Error(ErrorCode::NotMain, "device '" + requester.str() + "' is not in room");
  }
  std::lock_guard lock(room->mutex);
  if (room->retired || !room->is_connected_main(requester)) {
    throw Error(ErrorCode::NotMain,
                "device '" + requester.str() + "' does not hold the main role");
  }
  if (room->latest_pose && pose.seq() <= room->latest_pose->seq()) return false;
  room->latest_pose = pose;
  room->broadcast_except(requester, server::Pose{pose});
  return true;
}

void SyncServer::leave(const RoomId& room_id, const DeviceId& device) {
  auto room = find_room(room_id);
  if (!room) return;
  {
    std::lock_guard lock(room->mutex);
    if (room->retired || room->devices.erase(device) == 0) return;
    room->broadcast_except(device, server::DeviceLeft{device.str()});
    if (!room->devices.empty()) return;
    room->retired = true;
  }
  retire_if_empty(room_id, room);
}

void SyncServer::load_config_library(const RoomId& room_id,
                                     std::vector<ViewConfiguration> configs) {
  Library library = make_library(std::move(configs));
  {
    std::lock_guard lock(registry_mutex_);
    room_libraries_.insert_or_assign(room_id, library);
  }
  auto room = find_room(room_id);
  if (!room) return;

  std::lock_guard lock(room->mutex);
  if (room->retired) return;
  const ViewConfiguration* before = room->active_config();
  std::optional<ViewConfiguration> previous;
  if (before) previous = *before;
  room->library = std::move(library);

  if (!previous) return;
  const auto* now = room->active_config();
  if (now && *now == *previous) return;
  if (!now) {
    room->active.reset();
  } else {
    room->main_device = now->main_view().device_id;
  }
  room->broadcast_configuration();
}

void SyncServer::load_config_library(const RoomId& room_id,
                                     const std::vector<ConfigDocument>& docs) {
  std::vector<ViewConfiguration> configs;
  std::vector<std::string> problems;
  for (const auto& doc : docs) {
    const auto diagnostics = frustum::validate_configuration(doc);
    if (diagnostics.empty()) {
      configs.push_back(frustum::make_configuration(doc));
      continue;
    }
    for (const auto& d : diagnostics) {
      problems.push_back(doc.config_id + ": " + format(d));
    }
  }
  if (!problems.empty()) {
    throw Error(ErrorCode::InvalidConfig, "configuration library rejected",
                std::move(problems));
  }
  load_config_library(room_id, std::move(configs));
}

RoomSummary SyncServer::summary(const RoomId& room_id) const {
  RoomSummary out;
  auto room = find_room(room_id);
  if (!room) return out;
  std::lock_guard lock(room->mutex);
  if (room->retired) return out;
  out.exists = true;
  for (const auto& [device, sink] : room->devices) out.devices.push_back(device.str());
  if (room->main_device) {
    out.main_device = room->main_device->str();
    out.main_connected = room->devices.count(*room->main_device) != 0;
  }
  out.active_config = room->active;
  if (room->latest_pose) out.latest_seq = room->latest_pose->seq();
  for (const auto& [id, config] : room->library) out.library.push_back(id);
  return out;
}

std::vector<std::string> SyncServer::default_config_ids() const {
  std::lock_guard lock(registry_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, config] : default_library_) ids.push_back(id);
  return ids;
}

std::size_t SyncServer::room_count() const {
  std::lock_guard lock(registry_mutex_);
  return rooms_.size();
}

}  // namespace citywall::sync
