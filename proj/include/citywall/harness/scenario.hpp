#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "citywall/core/projection.hpp"

namespace citywall::harness {

// Delivery adversary applied to every connection. Latency is drawn uniformly
// per frame. Reordering lets a pose overtake earlier poses (never a control
// frame). Drops only hit server->client poses that a newer pose on the same
// connection has already superseded, which is the loss coalescing permits.
struct NetworkModel {
  double latency_min_ms = 0.0;
  double latency_max_ms = 0.0;
  double reorder_probability = 0.0;
  double drop_probability = 0.0;
};

namespace step {
struct Join {};
struct Leave {
  bool abrupt = false;  // close the connection without a leave message
};
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // meters per repeat
  std::optional<std::uint64_t> seq;  // explicit seq; default continues the counter
  int repeat = 1;
  double interval_ms = 0.0;
};
struct SwitchConfig {
  std::string config_id;
};
struct Assert {
  std::string check;                    // consistent | role | config
  std::optional<std::string> expected;  // role name or config id
};
}  // namespace step

using StepAction =
    std::variant<step::Join, step::Leave, step::Pose, step::SwitchConfig, step::Assert>;

struct ScenarioStep {
  double at_ms = 0.0;
  std::string device;  // empty only for room-wide asserts
  StepAction action;
};

struct ScenarioScript {
  std::string room_id = "room";
  std::vector<ConfigDocument> configs;
  NetworkModel network;
  std::vector<ScenarioStep> steps;
  // Devices whose client-side staleness guard is switched off.
  std::set<std::string> unguarded_devices;
};

// Problems with an otherwise parsed script (ordering, probability ranges).
std::vector<std::string> validate_scenario(const ScenarioScript& script);

// Scenario file:
//   {"roomId": s, "configs": [config objects], "configFiles": [paths],
//    "network": {"latencyMillis": [min, max], "reorderProbability": p,
//                "dropProbability": p},
//    "faults": {"disableClientGuard": [deviceIds]},
//    "steps": [{"atMillis": t, "action": "join"|"leave"|"pose"|
//               "switch_config"|"assert", "params": {...}}]}
// configFiles resolve against `base_dir`. Throws ScenarioError.
ScenarioScript parse_scenario(const nlohmann::json& j,
                              const std::filesystem::path& base_dir = {});
ScenarioScript load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const ScenarioScript& script);

}  // namespace citywall::harness
