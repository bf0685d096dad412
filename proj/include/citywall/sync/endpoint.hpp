#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "citywall/sync/server.hpp"

namespace citywall::sync {

enum class FrameKind { Control, Pose };

struct Frame {
  std::string text;
  FrameKind kind = FrameKind::Control;
  std::uint64_t pose_seq = 0;  // valid for Pose frames
};

// Transport side of one connection.
class FrameSink {
 public:
  virtual ~FrameSink() = default;
  virtual void send(Frame frame) = 0;
};

using ConnectionId = std::uint64_t;

// Text-frame front end of a SyncServer: decodes client frames, tracks which
// room/device each connection joined as, and reports failures as error
// frames. on_frame/on_close for one connection must not run concurrently.
class ProtocolEndpoint {
 public:
  explicit ProtocolEndpoint(SyncServer& server);

  ConnectionId open(std::shared_ptr<FrameSink> sink);
  void on_frame(ConnectionId connection, std::string_view text);
  // Leaves the room if the connection had joined one.
  void on_close(ConnectionId connection);

  SyncServer& server() noexcept { return server_; }

 private:
  struct Connection;

  std::shared_ptr<Connection> find(ConnectionId id) const;
  void handle(Connection& c, const ClientMessage& message);

  SyncServer& server_;
  mutable std::mutex mutex_;
  ConnectionId next_id_ = 1;
  std::unordered_map<ConnectionId, std::shared_ptr<Connection>> connections_;
};

// Outgoing queue for a connection with latest-wins pose coalescing: a queued
// pose that has not started writing is replaced by a newer one. Control
// frames are never dropped or reordered.
class CoalescingOutbox {
 public:
  // Returns true when the caller should start a write (nothing in flight).
  bool push(Frame frame);
  // Removes the next frame and marks it in flight.
  std::optional<Frame> take();
  // Completes the in-flight frame; returns true when more frames wait.
  bool done();

  std::size_t queued() const noexcept { return queue_.size(); }
  std::uint64_t coalesced() const noexcept { return coalesced_; }

 private:
  std::deque<Frame> queue_;
  bool in_flight_ = false;
  std::uint64_t coalesced_ = 0;
};

}  // namespace citywall::sync
