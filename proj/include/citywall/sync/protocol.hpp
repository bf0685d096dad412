#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "citywall/core/pose.hpp"
#include "citywall/core/projection.hpp"

namespace citywall::sync {

// Wire protocol: one JSON object per text frame, discriminated by "event".
// Matrices travel as 16 numbers, column-major; orientations as [w, x, y, z].

namespace client {
struct Join {
  std::string room_id;
  std::string device_id;
};
struct Pose {
  CameraPose pose;
};
struct SwitchConfig {
  std::string config_id;
};
struct Leave {};
}  // namespace client

using ClientMessage =
    std::variant<client::Join, client::Pose, client::SwitchConfig, client::Leave>;

using Matrix16 = std::array<double, 16>;

namespace server {
struct SelfJoined {
  Role role = Role::Auxiliary;
  std::optional<std::string> config_id;
  std::optional<Matrix16> projection;
  std::optional<CameraPose> pose;
};
struct DeviceJoined {
  std::string device_id;
};
struct DeviceLeft {
  std::string device_id;
};
// Sent once per device per switch. A null config id means the active
// configuration was cleared; a null projection with a config id means the
// device is not part of that configuration.
struct Configuration {
  std::optional<std::string> config_id;
  std::optional<Matrix16> projection;
  Role role = Role::Auxiliary;
};
struct Pose {
  CameraPose pose;
};
struct Error {
  std::string code;
  std::string detail;
};
}  // namespace server

using ServerMessage =
    std::variant<server::SelfJoined, server::DeviceJoined, server::DeviceLeft,
                 server::Configuration, server::Pose, server::Error>;

// Decoders throw citywall::Error(ParseError) on malformed frames.
ClientMessage decode_client(std::string_view frame);
std::string encode(const ClientMessage& message);

ServerMessage decode_server(std::string_view frame);
std::string encode(const ServerMessage& message);

std::string_view event_name(const ServerMessage& message);

}  // namespace citywall::sync
