#include "citywall/harness/scenario.hpp"

#include <fstream>
#include <sstream>

#include "citywall/core/error.hpp"
#include "citywall/frustum/configuration.hpp"

namespace citywall::harness {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void fail(const std::string& what) {
  throw Error(ErrorCode::ScenarioError, what);
}

Eigen::Vector3d read_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where + " must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ScenarioStep read_step(const json& s, std::size_t index) {
  const std::string where = "step " + std::to_string(index);
  ScenarioStep step;
  step.at_ms = s.at("atMillis").get<double>();
  const auto action = s.at("action").get<std::string>();
  const json params = s.value("params", json::object());
  step.device = params.value("device", std::string{});

  if (action == "join") {
    step.action = step::Join{};
  } else if (action == "leave") {
    step.action = step::Leave{params.value("abrupt", false)};
  } else if (action == "pose") {
    step::Pose p;
    if (params.contains("position")) p.position = read_vec3(params["position"], where + " position");
    if (params.contains("velocity")) p.velocity = read_vec3(params["velocity"], where + " velocity");
    if (params.contains("orientation")) {
      const auto& o = params["orientation"];
      if (!o.is_array() || o.size() != 4) fail(where + " orientation must be [w, x, y, z]");
      p.orientation = Eigen::Quaterniond(o[0].get<double>(), o[1].get<double>(),
                                         o[2].get<double>(), o[3].get<double>());
    }
    if (params.contains("seq")) p.seq = params["seq"].get<std::uint64_t>();
    p.repeat = params.value("repeat", 1);
    p.interval_ms = params.value("intervalMillis", 0.0);
    if (p.repeat < 1) fail(where + " repeat must be >= 1");
    if (p.interval_ms < 0) fail(where + " intervalMillis must be >= 0");
    step.action = p;
  } else if (action == "switch_config") {
    step.action = step::SwitchConfig{params.at("configId").get<std::string>()};
  } else if (action == "assert") {
    step::Assert a;
    a.check = params.at("check").get<std::string>();
    if (params.contains("expected") && !params["expected"].is_null()) {
      a.expected = params["expected"].get<std::string>();
    }
    if (a.check != "consistent" && a.check != "role" && a.check != "config") {
      fail(where + " has unknown check '" + a.check + "'");
    }
    step.action = a;
  } else {
    fail(where + " has unknown action '" + action + "'");
  }

  const bool needs_device = !std::holds_alternative<step::Assert>(step.action) ||
                            std::get<step::Assert>(step.action).check != "consistent";
  if (needs_device && step.device.empty()) fail(where + " needs params.device");
  return step;
}

}  // namespace

std::vector<std::string> validate_scenario(const ScenarioScript& script) {
  std::vector<std::string> out;
  const auto& n = script.network;
  if (!(n.latency_min_ms >= 0 && n.latency_min_ms <= n.latency_max_ms)) {
    out.push_back("latency range must satisfy 0 <= min <= max");
  }
  const auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!probability(n.reorder_probability)) out.push_back("reorderProbability outside [0, 1]");
  if (!probability(n.drop_probability)) out.push_back("dropProbability outside [0, 1]");
  for (std::size_t i = 1; i < script.steps.size(); ++i) {
    if (script.steps[i].at_ms < script.steps[i - 1].at_ms) {
      out.push_back("step " + std::to_string(i) + " is earlier than its predecessor");
    }
  }
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    if (script.steps[i].at_ms < 0) {
      out.push_back("step " + std::to_string(i) + " has a negative time");
    }
  }
  return out;
}

ScenarioScript parse_scenario(const json& j, const std::filesystem::path& base_dir) {
  ScenarioScript script;
  try {
    if (!j.is_object()) fail("scenario must be a JSON object");
    script.room_id = j.value("roomId", std::string("room"));

    if (j.contains("configs")) {
      for (const auto& c : j["configs"]) {
        script.configs.push_back(frustum::config_document_from_json(c));
      }
    }
    if (j.contains("configFiles")) {
      for (const auto& f : j["configFiles"]) {
        const auto path = base_dir / f.get<std::string>();
        script.configs.push_back(frustum::parse_config_document(read_text(path)));
      }
    }
    if (j.contains("network")) {
      const auto& n = j["network"];
      if (n.contains("latencyMillis")) {
        const auto& range = n["latencyMillis"];
        if (!range.is_array() || range.size() != 2) fail("latencyMillis must be [min, max]");
        script.network.latency_min_ms = range[0].get<double>();
        script.network.latency_max_ms = range[1].get<double>();
      }
      script.network.reorder_probability = n.value("reorderProbability", 0.0);
      script.network.drop_probability = n.value("dropProbability", 0.0);
    }
    if (j.contains("faults") && j["faults"].contains("disableClientGuard")) {
      for (const auto& d : j["faults"]["disableClientGuard"]) {
        script.unguarded_devices.insert(d.get<std::string>());
      }
    }
    const auto& steps = j.at("steps");
    if (!steps.is_array()) fail("steps must be an array");
    for (std::size_t i = 0; i < steps.size(); ++i) {
      script.steps.push_back(read_step(steps[i], i));
    }
  } catch (const json::exception& e) {
    fail(std::string("malformed scenario: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ScenarioError) throw;
    fail(std::string("scenario configuration: ") + e.what());
  }

  const auto problems = validate_scenario(script);
  if (!problems.empty()) {
    throw Error(ErrorCode::ScenarioError, "scenario is invalid", problems);
  }
  return script;
}

ScenarioScript load_scenario(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    fail(path.string() + ": " + e.what());
  }
  return parse_scenario(j, path.parent_path());
}

json to_json(const ScenarioScript& script) {
  json configs = json::array();
  for (const auto& c : script.configs) configs.push_back(frustum::to_json(c));

  json steps = json::array();
  for (const auto& s : script.steps) {
    json params = json::object();
    if (!s.device.empty()) params["device"] = s.device;
    const char* action = std::visit(
        Overloaded{
            [](const step::Join&) { return "join"; },
            [&](const step::Leave& l) {
              if (l.abrupt) params["abrupt"] = true;
              return "leave";
            },
            [&](const step::Pose& p) {
              params["position"] = {p.position.x(), p.position.y(), p.position.z()};
              params["orientation"] = {p.orientation.w(), p.orientation.x(),
                                       p.orientation.y(), p.orientation.z()};
              if (!p.velocity.isZero()) {
                params["velocity"] = {p.velocity.x(), p.velocity.y(), p.velocity.z()};
              }
              if (p.seq) params["seq"] = *p.seq;
              if (p.repeat != 1) params["repeat"] = p.repeat;
              if (p.interval_ms != 0.0) params["intervalMillis"] = p.interval_ms;
              return "pose";
            },
            [&](const step::SwitchConfig& c) {
              params["configId"] = c.config_id;
              return "switch_config";
            },
            [&](const step::Assert& a) {
              params["check"] = a.check;
              if (a.expected) params["expected"] = *a.expected;
              return "assert";
            },
        },
        s.action);
    steps.push_back({{"atMillis", s.at_ms}, {"action", action}, {"params", std::move(params)}});
  }

  json out = {{"roomId", script.room_id},
              {"configs", std::move(configs)},
              {"network",
               {{"latencyMillis", {script.network.latency_min_ms, script.network.latency_max_ms}},
                {"reorderProbability", script.network.reorder_probability},
                {"dropProbability", script.network.drop_probability}}},
              {"steps", std::move(steps)}};
  if (!script.unguarded_devices.empty()) {
    out["faults"] = {{"disableClientGuard", script.unguarded_devices}};
  }
  return out;
}

}  // namespace citywall::harness
