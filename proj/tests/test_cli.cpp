#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "citywall/frustum/configuration.hpp"
#include "live.hpp"

using namespace citywall;
using citywall::testing::run_cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& rel) { return testing::data_dir() + "/" + rel; }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("citywall-cli-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("gen-grid writes a configuration that validates") {
  const auto out = scratch("office.json").string();
  const auto r = run_cli({"gen-grid", "--rows", "1", "--cols", "2", "--tile-w", "0.6", "--tile-h",
                          "0.34", "--eye-dist", "0.7", "--ids", "left,right", "--out", out});
  REQUIRE(r.exit_code == 0);
  const auto config = frustum::load_configuration(testing::read_text(out));
  CHECK(config.id() == "grid-2x1");
  CHECK(config.main_view().device_id.str() == "left");
  // The checked-in office wall was produced by the same command.
  CHECK(config == frustum::load_configuration(testing::read_text(data("configs/grid-2x1.json"))));

  const auto v = run_cli({"validate", out});
  CHECK(v.exit_code == 0);
  CHECK(json::parse(v.out)["valid"] == true);
}

TEST_CASE("gen-grid rejects a wrong id count as a usage error") {
  const auto r = run_cli({"gen-grid", "--rows", "2", "--cols", "2", "--ids", "a,b,c"});
  CHECK(r.exit_code == 2);
  CHECK(json::parse(r.err)["error"] == "CountMismatch");
}

TEST_CASE("validate reports structural problems with exit 1") {
  const auto path = scratch("two-mains.json");
  auto doc = json::parse(testing::read_text(data("configs/grid-2x1.json")));
  doc["views"][1]["role"] = "main";
  {
    std::ofstream(path) << doc.dump();
  }
  const auto r = run_cli({"validate", path.string()});
  CHECK(r.exit_code == 1);
  const auto report = json::parse(r.out);
  CHECK(report["valid"] == false);
  REQUIRE(report["diagnostics"].size() == 1);
  CHECK(report["diagnostics"][0]["code"] == "main_count");

  CHECK(run_cli({"validate", scratch("missing.json").string()}).exit_code == 1);

  doc = json::parse(testing::read_text(data("configs/grid-2x1.json")));
  doc["views"][0]["projection"] = json::array();
  for (int i = 0; i < 16; ++i) doc["views"][0]["projection"].push_back(0.0);
  const auto singular_path = scratch("singular.json");
  {
    std::ofstream(singular_path) << doc.dump();
  }
  const auto singular = run_cli({"validate", singular_path.string()});
  CHECK(singular.exit_code == 1);
  CHECK(json::parse(singular.out)["diagnostics"][0]["code"] == "non_invertible");
}

TEST_CASE("convert-mpcdi on a single 45 degree region gives the symmetric frustum") {
  const auto r = run_cli({"convert-mpcdi", "--in", data("calibration/single45.xml"), "--near", "1",
                          "--far", "10"});
  REQUIRE(r.exit_code == 0);
  const auto config = frustum::load_configuration(r.out);
  REQUIRE(config.views().size() == 1);
  CHECK(config.views()[0].device_id.str() == "projector-1");
  CHECK(config.views()[0].role == Role::Main);
  const auto& m = config.views()[0].projection.matrix();
  CHECK(m(0, 0) == doctest::Approx(1.0));
  CHECK(m(1, 1) == doctest::Approx(1.0));
  CHECK(m(0, 2) == doctest::Approx(0.0));
  CHECK(m(2, 2) == doctest::Approx(-11.0 / 9.0));
  CHECK(m(2, 3) == doctest::Approx(-20.0 / 9.0));
}

TEST_CASE("serve exposes the office wall and the PetClinic city") {
  testing::ServeProcess serve({"--configs", data("configs"), "--structure",
                               data("structure/petclinic.json"), "--traces",
                               data("traces/petclinic-100.jsonl")});
  CHECK(testing::http_get(serve.port(), "/healthz").first == 200);
  const auto layout = json::parse(testing::http_get(serve.port(), "/layout").second);
  CHECK(layout["buildings"].size() == 117);
  testing::WsClient left(serve.port(), "/ws?roomId=office&deviceId=left");
  left.read_event("self_joined");
  testing::WsClient right(serve.port(), "/ws?roomId=office&deviceId=right");
  right.read_event("self_joined");
  left.send({{"event", "switch_config"}, {"configId", "grid-2x1"}});
  CHECK(right.read_event("configuration")["projection"].size() == 16);
  CHECK(serve.stop() == 0);
}

TEST_CASE("convert-mpcdi turns the dome calibration into five projector views") {
  const auto out = scratch("dome.json").string();
  const auto r = run_cli({"convert-mpcdi", "--in", data("calibration/dome5.xml"), "--near", "0.1",
                          "--far", "1000", "--main-id", "main", "--config-id", "arena5", "--out",
                          out});
  REQUIRE(r.exit_code == 0);
  const auto config = frustum::load_configuration(testing::read_text(out));
  CHECK(config.views().size() == 6);
  CHECK(config.main_view().device_id.str() == "main");
  CHECK(config == frustum::load_configuration(testing::read_text(data("configs/arena5.json"))));

  const auto missing = run_cli({"convert-mpcdi", "--in", data("calibration/missing_frustum.xml")});
  CHECK(missing.exit_code == 1);
  CHECK(json::parse(missing.err)["error"] == "UnsupportedProfile");
}

TEST_CASE("simulate exits 0 on a clean run and 1 on the negative control") {
  const auto good = run_cli({"simulate", "--scenario", data("scenarios/dome-adversarial.json"),
                             "--seed", "4"});
  CHECK(good.exit_code == 0);
  const auto report = json::parse(good.out);
  CHECK(report["consistent"] == true);
  CHECK(report["violations"].empty());

  const auto bad = run_cli({"simulate", "--scenario", data("scenarios/negative-unguarded.json"),
                            "--seed", "4"});
  CHECK(bad.exit_code == 1);
  CHECK(json::parse(bad.out)["consistent"] == false);

  const auto missing = run_cli({"simulate", "--scenario", scratch("nope.json").string()});
  CHECK(missing.exit_code == 1);
  CHECK(json::parse(missing.err)["error"] == "ScenarioError");
}

TEST_CASE("layout prints the city export") {
  const auto r = run_cli({"layout", "--structure", data("structure/petclinic.json"), "--traces",
                          data("traces/petclinic-100.jsonl")});
  REQUIRE(r.exit_code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["buildings"].size() == 117);
  CHECK_FALSE(j["arcs"].empty());
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli({}).exit_code == 2);
  CHECK(run_cli({"frobnicate"}).exit_code == 2);
  CHECK(run_cli({"gen-grid", "--rows", "1"}).exit_code == 2);
  CHECK(run_cli({"gen-grid", "--rows", "1", "--cols", "1", "--near", "5", "--far", "1"}).exit_code ==
        2);
}

TEST_CASE("serve takes its config directory from the environment unless a flag is given") {
  ::setenv("CITYWALL_CONFIG_DIR", data("configs").c_str(), 1);
  {
    testing::ServeProcess serve({});
    const auto [status, body] = testing::http_get(serve.port(), "/configs");
    CHECK(status == 200);
    CHECK(json::parse(body) == json::array({"arena5", "grid-2x1"}));
    CHECK(serve.stop() == 0);
  }
  {
    const auto empty = scratch("empty-configs");
    fs::create_directories(empty);
    testing::ServeProcess serve({"--configs", empty.string()});
    CHECK(json::parse(testing::http_get(serve.port(), "/configs").second).empty());
    testing::WsClient client(serve.port(), "/ws?roomId=office&deviceId=left");
    client.read_event("self_joined");
    client.send({{"event", "switch_config"}, {"configId", "grid-2x1"}});
    CHECK(client.read_event("error")["code"] == "UnknownConfig");
  }
  ::unsetenv("CITYWALL_CONFIG_DIR");
}
