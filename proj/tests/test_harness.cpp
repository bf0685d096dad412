#include <doctest.h>

#include <set>

#include "citywall/core/error.hpp"
#include "citywall/harness/harness.hpp"
#include "citywall/harness/scenario.hpp"
#include "live.hpp"

using namespace citywall;
using namespace citywall::harness;
using nlohmann::json;

namespace {

ScenarioScript scenario(const std::string& name) {
  return load_scenario(testing::data_dir() + "/scenarios/" + name + ".json");
}

bool mentions(const std::vector<std::string>& lines, const std::string& needle) {
  for (const auto& l : lines) {
    if (l.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::size_t count_kind(const Report& r, const std::string& kind) {
  std::size_t n = 0;
  for (const auto& v : r.violations) n += v.kind == kind;
  return n;
}

}  // namespace

TEST_CASE("trivial scenario converges immediately") {
  const auto report = run_scenario(scenario("trivial"), 1);
  CHECK(report.violations.empty());
  CHECK(report.convergence_ms == std::optional<double>(0.0));
  CHECK(assert_consistent(report).pass);
}

TEST_CASE("runs are reproducible from the seed") {
  const auto script = scenario("dome-adversarial");
  const auto a = to_json(run_scenario(script, 7)).dump();
  const auto b = to_json(run_scenario(script, 7)).dump();
  const auto c = to_json(run_scenario(script, 8)).dump();
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("five followers converge under latency and reordering") {
  const auto script = scenario("dome-adversarial");
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    const auto report = run_scenario(script, seed);
    for (const auto& v : report.violations) FAIL_CHECK(v.kind << " " << v.device << ": " << v.message);
    CHECK(report.finals.size() == 6);
    CHECK(report.main_device == std::optional<std::string>("main"));
    CHECK(report.stats.poses_reordered > 0);
    CHECK(report.stats.switches == 1);
    const auto consistency = assert_consistent(report);
    CHECK(consistency.pass);
    REQUIRE(report.convergence_ms);
    CHECK(*report.convergence_ms <= 500.0);
  }
}

TEST_CASE("lossy delivery still converges") {
  const auto report = run_scenario(scenario("dome-lossy"), 3);
  CHECK(report.violations.empty());
  CHECK(report.stats.poses_dropped > 0);
  CHECK(assert_consistent(report).pass);
}

TEST_CASE("followers without the staleness guard are caught") {
  const auto report = run_scenario(scenario("negative-unguarded"), 1);
  CHECK(count_kind(report, "staleness") > 0);
  CHECK_FALSE(assert_consistent(report).pass);
}

TEST_CASE("a corrupted log names the offending device") {
  auto report = run_scenario(scenario("dome-adversarial"), 2);
  REQUIRE(assert_consistent(report).pass);

  auto wrong_pose = report;
  auto& final3 = wrong_pose.finals.at("projector-3");
  REQUIRE(final3.pose);
  final3.pose = CameraPose(final3.pose->position(), final3.pose->orientation(),
                           final3.pose->seq() - 1);
  auto result = assert_consistent(wrong_pose);
  CHECK_FALSE(result.pass);
  CHECK(mentions(result.diffs, "projector-3"));

  auto wrong_log = report;
  auto& log = wrong_log.applied_logs.at("projector-1");
  std::vector<std::size_t> with_seq;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].seq) with_seq.push_back(i);
  }
  REQUIRE(with_seq.size() >= 3);
  std::swap(log[with_seq[1]].seq, log[with_seq[2]].seq);
  result = assert_consistent(wrong_log);
  CHECK_FALSE(result.pass);
  CHECK(mentions(result.diffs, "projector-1"));

  auto wrong_config = report;
  wrong_config.finals.at("projector-5").config_id = "other";
  CHECK(mentions(assert_consistent(wrong_config).diffs, "projector-5"));
}

TEST_CASE("a follower that drops out and rejoins catches up") {
  const auto script = scenario("office-rejoin");
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CAPTURE(seed);
    const auto report = run_scenario(script, seed);
    CHECK(report.violations.empty());
    CHECK(assert_consistent(report).pass);
    std::set<int> sessions;
    for (const auto& e : report.applied_logs.at("right")) sessions.insert(e.session);
    CHECK(sessions.size() == 2);
  }
}

TEST_CASE("scripts round-trip through JSON") {
  const auto script = scenario("dome-adversarial");
  const auto again = parse_scenario(to_json(script));
  CHECK(to_json(again) == to_json(script));
  CHECK(validate_scenario(script).empty());
}

TEST_CASE("malformed scripts are scenario errors") {
  const auto fails = [](const json& j) {
    try {
      parse_scenario(j);
    } catch (const Error& e) {
      return e.code() == ErrorCode::ScenarioError;
    }
    return false;
  };
  CHECK(fails(json::array()));
  CHECK(fails({{"steps", {{{"atMillis", 0}, {"action", "dance"}, {"params", {{"device", "a"}}}}}}}));
  CHECK(fails({{"steps", {{{"atMillis", 0}, {"action", "join"}, {"params", json::object()}}}}}));
  CHECK(fails({{"steps", {{{"atMillis", 5}, {"action", "join"}, {"params", {{"device", "a"}}}},
                          {{"atMillis", 1}, {"action", "join"}, {"params", {{"device", "b"}}}}}}}));
  CHECK(fails({{"network", {{"latencyMillis", {50, 10}}}}, {"steps", json::array()}}));
  CHECK(fails({{"network", {{"reorderProbability", 1.5}}}, {"steps", json::array()}}));
  CHECK(fails({{"configFiles", {"missing.json"}}, {"steps", json::array()}}));
  CHECK_FALSE(fails({{"steps", json::array()}}));
}
