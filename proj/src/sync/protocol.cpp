#include "citywall/sync/protocol.hpp"

#include <nlohmann/json.hpp>

#include "citywall/core/error.hpp"

namespace citywall::sync {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void fail(const std::string& what) {
  throw citywall::Error(ErrorCode::ParseError, what);
}

json pose_fields(const CameraPose& pose) {
  const auto& p = pose.position();
  const auto& q = pose.orientation();
  return {{"position", {p.x(), p.y(), p.z()}},
          {"orientation", {q.w(), q.x(), q.y(), q.z()}},
          {"seq", pose.seq()}};
}

std::array<double, 3> read_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) fail("position must be [x, y, z]");
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j[i].is_number()) fail("position must hold numbers");
    out[i] = j[i].get<double>();
  }
  return out;
}

CameraPose read_pose(const json& j) {
  if (!j.is_object()) fail("pose must be an object");
  const auto p = read_vec3(j.at("position"));
  const auto& o = j.at("orientation");
  if (!o.is_array() || o.size() != 4) fail("orientation must be [w, x, y, z]");
  for (const auto& v : o) {
    if (!v.is_number()) fail("orientation must hold numbers");
  }
  const auto& seq = j.at("seq");
  if (!seq.is_number_unsigned()) fail("seq must be an unsigned integer");
  try {
    return CameraPose(Eigen::Vector3d(p[0], p[1], p[2]),
                      Eigen::Quaterniond(o[0].get<double>(), o[1].get<double>(),
                                         o[2].get<double>(), o[3].get<double>()),
                      seq.get<std::uint64_t>());
  } catch (const citywall::Error& e) {
    fail(e.what());
  }
}

json matrix_or_null(const std::optional<Matrix16>& m) {
  return m ? json(*m) : json(nullptr);
}

std::optional<Matrix16> read_matrix(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_array() || j.size() != 16) fail("projection must hold 16 numbers");
  Matrix16 out{};
  for (std::size_t i = 0; i < 16; ++i) {
    if (!j[i].is_number()) fail("projection must hold 16 numbers");
    out[i] = j[i].get<double>();
  }
  return out;
}

std::optional<std::string> read_optional_string(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

json parse_object(std::string_view frame) {
  json j;
  try {
    j = json::parse(frame);
  } catch (const json::parse_error& e) {
    fail(std::string("frame is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("event") || !j["event"].is_string()) {
    fail("frame must be an object with a string \"event\"");
  }
  return j;
}

}  // namespace

ClientMessage decode_client(std::string_view frame) {
  const json j = parse_object(frame);
  const auto event = j["event"].get<std::string>();
  try {
    if (event == "join") {
      return client::Join{j.at("roomId").get<std::string>(),
                          j.at("deviceId").get<std::string>()};
    }
    if (event == "pose") return client::Pose{read_pose(j)};
    if (event == "switch_config") {
      return client::SwitchConfig{j.at("configId").get<std::string>()};
    }
    if (event == "leave") return client::Leave{};
  } catch (const json::exception& e) {
    fail(event + ": " + e.what());
  }
  fail("unknown client event '" + event + "'");
}

std::string encode(const ClientMessage& message) {
  return std::visit(
             Overloaded{
                 [](const client::Join& m) {
                   return json{{"event", "join"},
                               {"roomId", m.room_id},
                               {"deviceId", m.device_id}};
                 },
                 [](const client::Pose& m) {
                   json j = pose_fields(m.pose);
                   j["event"] = "pose";
                   return j;
                 },
                 [](const client::SwitchConfig& m) {
                   return json{{"event", "switch_config"}, {"configId", m.config_id}};
                 },
                 [](const client::Leave&) { return json{{"event", "leave"}}; },
             },
             message)
      .dump();
}

ServerMessage decode_server(std::string_view frame) {
  const json j = parse_object(frame);
  const auto event = j["event"].get<std::string>();
  try {
    if (event == "self_joined") {
      server::SelfJoined m;
      m.role = parse_role(j.at("role").get<std::string>());
      m.config_id = read_optional_string(j.at("configId"));
      m.projection = read_matrix(j.at("projection"));
      if (!j.at("pose").is_null()) m.pose = read_pose(j["pose"]);
      return m;
    }
    if (event == "device_joined") {
      return server::DeviceJoined{j.at("deviceId").get<std::string>()};
    }
    if (event == "device_left") {
      return server::DeviceLeft{j.at("deviceId").get<std::string>()};
    }
    if (event == "configuration") {
      server::Configuration m;
      m.config_id = read_optional_string(j.at("configId"));
      m.projection = read_matrix(j.at("projection"));
      m.role = parse_role(j.value("role", std::string("auxiliary")));
      return m;
    }
    if (event == "pose") return server::Pose{read_pose(j)};
    if (event == "error") {
      return server::Error{j.at("code").get<std::string>(),
                           j.value("detail", std::string{})};
    }
  } catch (const json::exception& e) {
    fail(event + ": " + e.what());
  }
  fail("unknown server event '" + event + "'");
}

std::string encode(const ServerMessage& message) {
  return std::visit(
             Overloaded{
                 [](const server::SelfJoined& m) {
                   return json{{"event", "self_joined"},
                               {"role", to_string(m.role)},
                               {"configId", m.config_id ? json(*m.config_id)
                                                        : json(nullptr)},
                               {"projection", matrix_or_null(m.projection)},
                               {"pose", m.pose ? pose_fields(*m.pose) : json(nullptr)}};
                 },
                 [](const server::DeviceJoined& m) {
                   return json{{"event", "device_joined"}, {"deviceId", m.device_id}};
                 },
                 [](const server::DeviceLeft& m) {
                   return json{{"event", "device_left"}, {"deviceId", m.device_id}};
                 },
                 [](const server::Configuration& m) {
                   return json{{"event", "configuration"},
                               {"configId", m.config_id ? json(*m.config_id)
                                                        : json(nullptr)},
                               {"projection", matrix_or_null(m.projection)},
                               {"role", to_string(m.role)}};
                 },
                 [](const server::Pose& m) {
                   json j = pose_fields(m.pose);
                   j["event"] = "pose";
                   return j;
                 },
                 [](const server::Error& m) {
                   return json{{"event", "error"}, {"code", m.code}, {"detail", m.detail}};
                 },
             },
             message)
      .dump();
}

std::string_view event_name(const ServerMessage& message) {
  static constexpr std::string_view names[] = {
      "self_joined", "device_joined", "device_left", "configuration", "pose", "error"};
  return names[message.index()];
}

}  // namespace citywall::sync
