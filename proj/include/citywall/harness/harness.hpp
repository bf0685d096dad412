#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "citywall/core/pose.hpp"
#include "citywall/core/projection.hpp"
#include "citywall/harness/scenario.hpp"

namespace citywall::harness {

// One state change applied by a client session.
struct AppliedEntry {
  enum class Kind { Snapshot, Pose, Configuration };
  double at_ms = 0.0;
  int session = 0;  // increments on every (re)join of the device
  Kind kind = Kind::Pose;
  std::optional<std::uint64_t> seq;  // pose seq, when the entry carries a pose
  std::optional<std::string> config_id;
};

struct FinalState {
  Role role = Role::Auxiliary;
  std::optional<std::string> config_id;
  bool has_projection = false;
  std::optional<CameraPose> pose;
};

struct Violation {
  std::string kind;  // staleness | authority | switch_atomicity | switch_order |
                     // delivery_order | assertion
  std::string device;
  double at_ms = 0.0;
  std::string message;
};

struct RunStats {
  std::uint64_t frames_to_server = 0;
  std::uint64_t frames_to_clients = 0;
  std::uint64_t poses_reordered = 0;
  std::uint64_t poses_dropped = 0;
  std::uint64_t stale_rejected = 0;  // rejected by client guards
  std::uint64_t switches = 0;
  std::map<std::string, std::uint64_t> errors;  // error frames by code
};

struct Report {
  std::uint64_t seed = 0;
  std::string room_id;
  std::optional<std::string> main_device;  // at the end of the run
  std::map<std::string, std::vector<AppliedEntry>> applied_logs;
  std::map<std::string, FinalState> finals;  // devices connected at the end
  std::vector<Violation> violations;
  // Last follower state change minus the main's last action, or empty when
  // the followers did not end consistent with the main.
  std::optional<double> convergence_ms;
  double end_ms = 0.0;
  RunStats stats;
};

// Runs the script against a real SyncServer through its text-frame endpoint,
// with the adversarial network in between, until no frame is in flight.
// Deterministic for a given (script, seed). Throws ScenarioError when the
// script is invalid.
Report run_scenario(const ScenarioScript& script, std::uint64_t seed);

struct ConsistencyResult {
  bool pass = true;
  std::vector<std::string> diffs;
};

// Every connected follower must hold the main's final (configId, pose), and
// every applied log must be strictly increasing in seq within a session and
// end at the session's final pose.
ConsistencyResult assert_consistent(const Report& report);

nlohmann::json to_json(const Report& report);

}  // namespace citywall::harness
