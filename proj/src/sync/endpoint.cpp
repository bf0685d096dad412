#include "citywall/sync/endpoint.hpp"

#include <algorithm>

#include "citywall/core/error.hpp"

namespace citywall::sync {

namespace {

// Encodes typed server messages into frames for one connection.
class EncodingSink final : public MessageSink {
 public:
  explicit EncodingSink(std::shared_ptr<FrameSink> out) : out_(std::move(out)) {}

  void deliver(const ServerMessage& message) override {
    Frame frame{encode(message), FrameKind::Control, 0};
    if (const auto* pose = std::get_if<server::Pose>(&message)) {
      frame.kind = FrameKind::Pose;
      frame.pose_seq = pose->pose.seq();
    }
    out_->send(std::move(frame));
  }

 private:
  std::shared_ptr<FrameSink> out_;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

struct ProtocolEndpoint::Connection {
  std::shared_ptr<FrameSink> out;
  std::optional<RoomId> room;
  std::optional<DeviceId> device;

  void send_error(ErrorCode code, const std::string& detail) {
    out->send({encode(server::Error{std::string(to_string(code)), detail}),
               FrameKind::Control, 0});
  }
};

ProtocolEndpoint::ProtocolEndpoint(SyncServer& server) : server_(server) {}

ConnectionId ProtocolEndpoint::open(std::shared_ptr<FrameSink> sink) {
  auto connection = std::make_shared<Connection>();
  connection->out = std::move(sink);
  std::lock_guard lock(mutex_);
  const auto id = next_id_++;
  connections_.emplace(id, std::move(connection));
  return id;
}

std::shared_ptr<ProtocolEndpoint::Connection> ProtocolEndpoint::find(
    ConnectionId id) const {
  std::lock_guard lock(mutex_);
  auto it = connections_.find(id);
  return it == connections_.end() ? nullptr : it->second;
}

void ProtocolEndpoint::on_frame(ConnectionId id, std::string_view text) {
  auto connection = find(id);
  if (!connection) return;
  try {
    handle(*connection, decode_client(text));
  } catch (const Error& e) {
    connection->send_error(e.code(), e.what());
  }
}

void ProtocolEndpoint::handle(Connection& c, const ClientMessage& message) {
  const auto require_joined = [&] {
    if (!c.room || !c.device) {
      throw Error(ErrorCode::NotJoined, "join a room before sending this event");
    }
  };

  std::visit(
      Overloaded{
          [&](const client::Join& m) {
            if (c.room) {
              throw Error(ErrorCode::AlreadyJoined,
                          "connection already joined as '" + c.device->str() + "'");
            }
            RoomId room(m.room_id);
            DeviceId device(m.device_id);
            server_.join(room, device, std::make_shared<EncodingSink>(c.out));
            c.room = std::move(room);
            c.device = std::move(device);
          },
          [&](const client::Pose& m) {
            require_joined();
            server_.publish_pose(*c.room, *c.device, m.pose);
          },
          [&](const client::SwitchConfig& m) {
            require_joined();
            server_.switch_config(*c.room, *c.device, m.config_id);
          },
          [&](const client::Leave&) {
            require_joined();
            server_.leave(*c.room, *c.device);
            c.room.reset();
            c.device.reset();
          },
      },
      message);
}

void ProtocolEndpoint::on_close(ConnectionId id) {
  std::shared_ptr<Connection> connection;
  {
    std::lock_guard lock(mutex_);
    auto it = connections_.find(id);
    if (it == connections_.end()) return;
    connection = std::move(it->second);
    connections_.erase(it);
  }
  if (connection->room && connection->device) {
    server_.leave(*connection->room, *connection->device);
  }
}

bool CoalescingOutbox::push(Frame frame) {
  if (frame.kind == FrameKind::Pose) {
    auto stale = std::find_if(queue_.begin(), queue_.end(), [](const Frame& f) {
      return f.kind == FrameKind::Pose;
    });
    if (stale != queue_.end()) {
      queue_.erase(stale);
      ++coalesced_;
    }
  }
  queue_.push_back(std::move(frame));
  return !in_flight_ && queue_.size() == 1;
}

std::optional<Frame> CoalescingOutbox::take() {
  if (queue_.empty()) return std::nullopt;
  Frame head = std::move(queue_.front());
  queue_.pop_front();
  in_flight_ = true;
  return head;
}

bool CoalescingOutbox::done() {
  in_flight_ = false;
  return !queue_.empty();
}

}  // namespace citywall::sync
