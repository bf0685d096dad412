#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <queue>
#include <random>

#include "citywall/core/error.hpp"
#include "citywall/harness/harness.hpp"
#include "citywall/sync/client_session.hpp"
#include "citywall/sync/endpoint.hpp"

namespace citywall::harness {

namespace {

using sync::ClientSession;
using sync::ConnectionId;
using sync::Frame;
using sync::FrameKind;

constexpr double kPoseTolerance = 1e-9;

bool poses_match(const CameraPose& a, const CameraPose& b) {
  return a.seq() == b.seq() &&
         (a.position() - b.position()).cwiseAbs().maxCoeff() <= kPoseTolerance &&
         (a.orientation().coeffs() - b.orientation().coeffs()).cwiseAbs().maxCoeff() <=
             kPoseTolerance;
}

std::string describe(const std::optional<std::string>& s) { return s ? *s : "none"; }

std::string describe(const std::optional<CameraPose>& p) {
  return p ? "seq " + std::to_string(p->seq()) : "none";
}

// Compares every follower against the main; empty when consistent.
std::vector<std::string> state_diffs(const std::optional<std::string>& main_device,
                                     const std::map<std::string, FinalState>& finals) {
  std::vector<std::string> diffs;
  if (!main_device) {
    diffs.push_back("room has no main device");
    return diffs;
  }
  auto main = finals.find(*main_device);
  if (main == finals.end()) {
    diffs.push_back("main device '" + *main_device + "' is not connected");
    return diffs;
  }
  const auto& want = main->second;
  for (const auto& [device, state] : finals) {
    if (device == *main_device) continue;
    if (state.config_id != want.config_id) {
      diffs.push_back(device + ": config " + describe(state.config_id) + ", main has " +
                      describe(want.config_id));
    }
    const bool same_pose = state.pose.has_value() == want.pose.has_value() &&
                           (!state.pose || poses_match(*state.pose, *want.pose));
    if (!same_pose) {
      diffs.push_back(device + ": pose " + describe(state.pose) + ", main has " +
                      describe(want.pose));
    }
  }
  return diffs;
}

// One connection, seen from both ends. Times are virtual milliseconds.
struct Channel {
  double tail = 0.0;          // latest delivery time scheduled on the channel
  double control_tail = 0.0;  // latest delivery time of a control frame
};

struct Link {
  std::string device;
  int session = 0;
  ConnectionId connection = 0;
  ClientSession client;
  bool client_open = true;   // the client still processes frames
  bool server_open = true;   // the server still has the connection
  bool server_joined = false;
  Channel up;
  Channel down;
  std::uint64_t max_emitted_pose_seq = 0;
  std::uint64_t last_control_emission = 0;
  std::uint64_t last_control_delivered = 0;
  std::uint64_t last_epoch_seen = 0;
  std::optional<std::uint64_t> last_logged_seq;

  Link(std::string d, int s, bool guard) : device(std::move(d)), session(s), client(guard) {}
};

class Simulation {
 public:
  Simulation(const ScenarioScript& script, std::uint64_t seed)
      : script_(script), room_(script.room_id), rng_(seed), endpoint_(server_) {
    report_.seed = seed;
    report_.room_id = script.room_id;
    if (!script.configs.empty()) server_.load_config_library(room_, script.configs);
  }

  Report run() {
    for (const auto& step : script_.steps) schedule_step(step);
    while (!queue_.empty()) {
      auto event = queue_.top();
      queue_.pop();
      now_ = event.at;
      event.fn();
    }
    finish();
    return std::move(report_);
  }

 private:
  struct Event {
    double at;
    std::uint64_t order;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.order > b.order;
    }
  };

  // Emissions captured while the server processes one client frame.
  struct Call {
    bool is_switch = false;
    std::uint64_t epoch = 0;
    std::map<std::size_t, int> configurations;  // link index -> count
  };

  class Sink final : public sync::FrameSink {
   public:
    Sink(Simulation& sim, std::size_t link) : sim_(sim), link_(link) {}
    void send(Frame frame) override { sim_.on_emit(link_, std::move(frame)); }

   private:
    Simulation& sim_;
    std::size_t link_;
  };

  void at(double t, std::function<void()> fn) {
    queue_.push(Event{t, next_order_++, std::move(fn)});
  }

  double draw_latency() {
    const auto& n = script_.network;
    if (n.latency_max_ms <= n.latency_min_ms) return n.latency_min_ms;
    return std::uniform_real_distribution<double>(n.latency_min_ms, n.latency_max_ms)(rng_);
  }

  bool chance(double p) {
    if (p <= 0.0) return false;
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p;
  }

  // FIFO except that a reordered pose only has to wait for earlier control
  // frames, so it may overtake earlier poses.
  double delivery_time(Channel& ch, bool is_pose) {
    const double arrival = now_ + draw_latency();
    double t;
    if (is_pose && chance(script_.network.reorder_probability)) {
      t = std::max(arrival, ch.control_tail);
      if (t < ch.tail) ++report_.stats.poses_reordered;
      ch.tail = std::max(ch.tail, t);
    } else {
      t = std::max(arrival, ch.tail);
      ch.tail = t;
      if (!is_pose) ch.control_tail = t;
    }
    return t;
  }

  Link& current_link(const std::string& device, double step_ms) {
    auto it = current_.find(device);
    if (it == current_.end() || !links_[it->second]->client_open) {
      throw Error(ErrorCode::ScenarioError,
                  "step at " + std::to_string(step_ms) + " ms: device '" + device +
                      "' has no open connection");
    }
    return *links_[it->second];
  }

  void violation(std::string kind, std::string device, std::string message) {
    report_.violations.push_back(
        Violation{std::move(kind), std::move(device), now_, std::move(message)});
  }

  void log_entry(Link& link, AppliedEntry::Kind kind, std::optional<std::uint64_t> seq) {
    if (seq) {
      if (link.last_logged_seq && *seq <= *link.last_logged_seq) {
        violation("staleness", link.device,
                  "applied seq " + std::to_string(*seq) + " after seq " +
                      std::to_string(*link.last_logged_seq));
      }
      link.last_logged_seq = seq;
    }
    report_.applied_logs[link.device].push_back(
        AppliedEntry{now_, link.session, kind, seq, link.client.config_id()});
    last_change_[link.device] = now_;
  }

  // ---- scripted actions ----

  void schedule_step(const ScenarioStep& step) {
    std::visit(
        [&](const auto& action) {
          using T = std::decay_t<decltype(action)>;
          if constexpr (std::is_same_v<T, step::Pose>) {
            for (int i = 0; i < action.repeat; ++i) {
              at(step.at_ms + i * action.interval_ms,
                 [this, &step, &action, i] { send_pose(step, action, i); });
            }
          } else {
            at(step.at_ms, [this, &step, &action] { perform(step, action); });
          }
        },
        step.action);
  }

  void perform(const ScenarioStep& step, const step::Join&) {
    const bool guard = !script_.unguarded_devices.count(step.device);
    const int session = ++sessions_[step.device];
    links_.push_back(std::make_unique<Link>(step.device, session, guard));
    const std::size_t index = links_.size() - 1;
    links_[index]->connection = endpoint_.open(std::make_shared<Sink>(*this, index));
    current_[step.device] = index;
    send_up(index, sync::client::Join{script_.room_id, step.device});
  }

  void perform(const ScenarioStep& step, const step::Leave& leave) {
    Link& link = current_link(step.device, step.at_ms);
    const std::size_t index = current_[step.device];
    if (leave.abrupt) {
      link.client_open = false;
      close_at_server(index);
      return;
    }
    send_up(index, sync::client::Leave{});
    link.client_open = false;
  }

  void perform(const ScenarioStep& step, const step::SwitchConfig& sw) {
    Link& link = current_link(step.device, step.at_ms);
    if (link.client.role() == Role::Main) main_action_[step.device] = now_;
    send_up(current_[step.device], sync::client::SwitchConfig{sw.config_id});
  }

  void perform(const ScenarioStep& step, const step::Assert& a) {
    if (a.check == "consistent") {
      for (const auto& diff : state_diffs(server_.summary(room_).main_device, finals())) {
        violation("assertion", step.device, "not consistent: " + diff);
      }
      return;
    }
    auto it = current_.find(step.device);
    if (it == current_.end()) {
      violation("assertion", step.device, "device never joined");
      return;
    }
    const Link& link = *links_[it->second];
    if (a.check == "role") {
      const auto actual = std::string(to_string(link.client.role()));
      if (!link.client.joined() || actual != a.expected.value_or("")) {
        violation("assertion", step.device,
                  "role is " + (link.client.joined() ? actual : std::string("unjoined")) +
                      ", expected " + a.expected.value_or("none"));
      }
    } else if (link.client.config_id() != a.expected) {
      violation("assertion", step.device,
                "config is " + describe(link.client.config_id()) + ", expected " +
                    describe(a.expected));
    }
  }

  void send_pose(const ScenarioStep& step, const step::Pose& p, int i) {
    Link& link = current_link(step.device, step.at_ms);
    auto& counter = seq_counter_[step.device];
    std::uint64_t seq;
    if (p.seq) {
      seq = *p.seq + static_cast<std::uint64_t>(i);
    } else {
      seq = std::max(counter, link.client.last_applied_seq()) + 1;
    }
    counter = std::max(counter, seq);
    const CameraPose pose(p.position + p.velocity * i, p.orientation, seq);
    if (link.client.role() == Role::Main) {
      main_action_[step.device] = now_;
      if (link.client.apply_local_pose(pose) == ClientSession::Outcome::Applied) {
        log_entry(link, AppliedEntry::Kind::Pose, seq);
      }
    }
    send_up(current_[step.device], sync::client::Pose{pose});
  }

  // ---- client -> server ----

  void send_up(std::size_t index, sync::ClientMessage message) {
    Link& link = *links_[index];
    const bool is_pose = std::holds_alternative<sync::client::Pose>(message);
    const double t = delivery_time(link.up, is_pose);
    ++report_.stats.frames_to_server;
    at(t, [this, index, message = std::move(message)] { process(index, message); });
  }

  void process(std::size_t index, const sync::ClientMessage& message) {
    Link& link = *links_[index];
    if (!link.server_open) return;

    const bool is_switch = std::holds_alternative<sync::client::SwitchConfig>(message);
    const bool mutates = is_switch || std::holds_alternative<sync::client::Pose>(message);
    const auto before = server_.summary(room_);

    Call call;
    call.is_switch = is_switch;
    if (is_switch) call.epoch = ++epoch_;
    call_ = &call;
    endpoint_.on_frame(link.connection, sync::encode(message));
    call_ = nullptr;

    const auto after = server_.summary(room_);
    const bool authorized = before.main_connected && before.main_device == link.device;
    if (mutates && !authorized &&
        (after.active_config != before.active_config || after.latest_seq != before.latest_seq)) {
      violation("authority", link.device, "non-main frame changed room state");
    }
    if (is_switch) check_switch(call, after);
    if (std::holds_alternative<sync::client::Leave>(message)) close_at_server(index);
  }

  void check_switch(const Call& call, const sync::RoomSummary& after) {
    if (call.configurations.empty()) return;  // rejected
    ++report_.stats.switches;
    std::map<std::size_t, int> expected;
    for (std::size_t i = 0; i < links_.size(); ++i) {
      const Link& l = *links_[i];
      if (l.server_open && l.server_joined &&
          std::binary_search(after.devices.begin(), after.devices.end(), l.device)) {
        expected[i] = 1;
      }
    }
    for (const auto& [i, want] : expected) {
      auto it = call.configurations.find(i);
      const int got = it == call.configurations.end() ? 0 : it->second;
      if (got != want) {
        violation("switch_atomicity", links_[i]->device,
                  "received " + std::to_string(got) + " configuration messages for one switch");
      }
    }
    for (const auto& [i, got] : call.configurations) {
      if (!expected.count(i)) {
        violation("switch_atomicity", links_[i]->device,
                  "configuration sent to a device outside the room");
      }
    }
  }

  void close_at_server(std::size_t index) {
    Link& link = *links_[index];
    if (!link.server_open) return;
    link.server_open = false;
    Call call;
    call_ = &call;
    endpoint_.on_close(link.connection);
    call_ = nullptr;
  }

  // ---- server -> client ----

  void on_emit(std::size_t index, Frame frame) {
    Link& link = *links_[index];
    const auto message = sync::decode_server(frame.text);
    const std::uint64_t emission = ++emissions_;
    std::uint64_t epoch = 0;
    if (std::holds_alternative<sync::server::SelfJoined>(message)) link.server_joined = true;
    if (std::holds_alternative<sync::server::Configuration>(message)) {
      if (call_ && call_->is_switch) {
        ++call_->configurations[index];
        epoch = call_->epoch;
      } else {
        violation("switch_atomicity", link.device, "configuration sent outside a switch");
      }
    }

    const bool is_pose = frame.kind == FrameKind::Pose;
    if (is_pose) {
      link.max_emitted_pose_seq = std::max(link.max_emitted_pose_seq, frame.pose_seq);
    } else {
      if (emission <= link.last_control_emission) {
        violation("delivery_order", link.device, "emission order went backwards");
      }
      link.last_control_emission = emission;
    }

    const double t = delivery_time(link.down, is_pose);
    ++report_.stats.frames_to_clients;
    at(t, [this, index, message, emission, epoch, is_pose, seq = frame.pose_seq] {
      deliver(index, message, emission, epoch, is_pose, seq);
    });
  }

  void deliver(std::size_t index, const sync::ServerMessage& message, std::uint64_t emission,
               std::uint64_t epoch, bool is_pose, std::uint64_t seq) {
    Link& link = *links_[index];
    if (!link.client_open) return;

    if (is_pose) {
      if (link.max_emitted_pose_seq > seq && chance(script_.network.drop_probability)) {
        ++report_.stats.poses_dropped;
        return;
      }
    } else {
      if (emission <= link.last_control_delivered) {
        violation("delivery_order", link.device, "control frame delivered out of order");
      }
      link.last_control_delivered = emission;
    }

    if (epoch != 0) {
      if (epoch <= link.last_epoch_seen) {
        violation("switch_order", link.device,
                  "switch " + std::to_string(epoch) + " observed after switch " +
                      std::to_string(link.last_epoch_seen));
      }
      link.last_epoch_seen = epoch;
    }

    const auto outcome = link.client.apply(message);
    using Outcome = ClientSession::Outcome;
    if (outcome == Outcome::StaleRejected) ++report_.stats.stale_rejected;
    if (outcome == Outcome::Error) ++report_.stats.errors[*link.client.last_error()];
    if (outcome != Outcome::Applied) return;

    if (const auto* joined = std::get_if<sync::server::SelfJoined>(&message)) {
      log_entry(link, AppliedEntry::Kind::Snapshot,
                joined->pose ? std::optional(joined->pose->seq()) : std::nullopt);
    } else if (std::holds_alternative<sync::server::Configuration>(message)) {
      log_entry(link, AppliedEntry::Kind::Configuration, std::nullopt);
    } else if (const auto* pose = std::get_if<sync::server::Pose>(&message)) {
      log_entry(link, AppliedEntry::Kind::Pose, pose->pose.seq());
    }
  }

  // ---- end of run ----

  std::map<std::string, FinalState> finals() const {
    std::map<std::string, FinalState> out;
    for (const auto& [device, index] : current_) {
      const Link& link = *links_[index];
      if (!link.client_open || !link.client.joined()) continue;
      out[device] = FinalState{link.client.role(), link.client.config_id(),
                               link.client.projection().has_value(), link.client.pose()};
    }
    return out;
  }

  void finish() {
    report_.end_ms = now_;
    const auto summary = server_.summary(room_);
    report_.main_device = summary.main_device;
    report_.finals = finals();
    if (!state_diffs(report_.main_device, report_.finals).empty()) return;

    const auto main_action = main_action_.find(*report_.main_device);
    const double last_action = main_action == main_action_.end() ? 0.0 : main_action->second;
    double converged = last_action;
    for (const auto& [device, state] : report_.finals) {
      if (device == *report_.main_device) continue;
      auto it = last_change_.find(device);
      if (it != last_change_.end()) converged = std::max(converged, it->second);
    }
    report_.convergence_ms = converged - last_action;
  }

  const ScenarioScript& script_;
  RoomId room_;
  std::mt19937_64 rng_;
  sync::SyncServer server_;
  sync::ProtocolEndpoint endpoint_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_order_ = 0;
  double now_ = 0.0;

  std::vector<std::unique_ptr<Link>> links_;
  std::map<std::string, std::size_t> current_;
  std::map<std::string, int> sessions_;
  std::map<std::string, std::uint64_t> seq_counter_;
  std::map<std::string, double> main_action_;
  std::map<std::string, double> last_change_;

  Call* call_ = nullptr;
  std::uint64_t epoch_ = 0;
  std::uint64_t emissions_ = 0;
  Report report_;
};

const char* kind_name(AppliedEntry::Kind kind) {
  switch (kind) {
    case AppliedEntry::Kind::Snapshot: return "snapshot";
    case AppliedEntry::Kind::Pose: return "pose";
    case AppliedEntry::Kind::Configuration: return "configuration";
  }
  return "unknown";
}

nlohmann::json pose_json(const CameraPose& p) {
  const auto& q = p.orientation();
  return {{"seq", p.seq()},
          {"position", {p.position().x(), p.position().y(), p.position().z()}},
          {"orientation", {q.w(), q.x(), q.y(), q.z()}}};
}

}  // namespace

Report run_scenario(const ScenarioScript& script, std::uint64_t seed) {
  const auto problems = validate_scenario(script);
  if (!problems.empty()) throw Error(ErrorCode::ScenarioError, "scenario is invalid", problems);
  try {
    return Simulation(script, seed).run();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ScenarioError) throw;
    throw Error(ErrorCode::ScenarioError, std::string("scenario setup failed: ") + e.what(),
                e.details());
  }
}

ConsistencyResult assert_consistent(const Report& report) {
  ConsistencyResult result;
  result.diffs = state_diffs(report.main_device, report.finals);

  for (const auto& [device, log] : report.applied_logs) {
    bool seen = false;
    std::uint64_t last = 0;
    int session = -1;
    for (const auto& entry : log) {
      if (entry.session != session) {
        session = entry.session;
        seen = false;
      }
      if (!entry.seq) continue;
      if (seen && *entry.seq <= last) {
        result.diffs.push_back(device + ": applied seq " + std::to_string(*entry.seq) +
                               " after seq " + std::to_string(last) + " in session " +
                               std::to_string(session));
      }
      seen = true;
      last = *entry.seq;
    }
    auto final_state = report.finals.find(device);
    if (final_state != report.finals.end() && final_state->second.pose && seen &&
        last != final_state->second.pose->seq()) {
      result.diffs.push_back(device + ": log ends at seq " + std::to_string(last) +
                             " but final pose has seq " +
                             std::to_string(final_state->second.pose->seq()));
    }
  }
  result.pass = result.diffs.empty();
  return result;
}

nlohmann::json to_json(const Report& report) {
  using nlohmann::json;
  json logs = json::object();
  for (const auto& [device, log] : report.applied_logs) {
    json entries = json::array();
    for (const auto& e : log) {
      entries.push_back({{"atMillis", e.at_ms},
                         {"session", e.session},
                         {"kind", kind_name(e.kind)},
                         {"seq", e.seq ? json(*e.seq) : json(nullptr)},
                         {"configId", e.config_id ? json(*e.config_id) : json(nullptr)}});
    }
    logs[device] = std::move(entries);
  }
  json finals = json::object();
  for (const auto& [device, s] : report.finals) {
    finals[device] = {{"role", std::string(to_string(s.role))},
                      {"configId", s.config_id ? json(*s.config_id) : json(nullptr)},
                      {"hasProjection", s.has_projection},
                      {"pose", s.pose ? pose_json(*s.pose) : json(nullptr)}};
  }
  json violations = json::array();
  for (const auto& v : report.violations) {
    violations.push_back({{"kind", v.kind},
                          {"device", v.device},
                          {"atMillis", v.at_ms},
                          {"message", v.message}});
  }
  const auto& s = report.stats;
  return {{"seed", report.seed},
          {"roomId", report.room_id},
          {"mainDevice", report.main_device ? json(*report.main_device) : json(nullptr)},
          {"perDeviceAppliedLog", std::move(logs)},
          {"finals", std::move(finals)},
          {"violations", std::move(violations)},
          {"convergenceMillis",
           report.convergence_ms ? json(*report.convergence_ms) : json(nullptr)},
          {"endMillis", report.end_ms},
          {"stats",
           {{"framesToServer", s.frames_to_server},
            {"framesToClients", s.frames_to_clients},
            {"posesReordered", s.poses_reordered},
            {"posesDropped", s.poses_dropped},
            {"staleRejected", s.stale_rejected},
            {"switches", s.switches},
            {"errors", s.errors}}}};
}

}  // namespace citywall::harness
