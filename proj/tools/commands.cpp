#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "citywall/city/ingest.hpp"
#include "citywall/city/layout.hpp"
#include "citywall/core/error.hpp"
#include "citywall/frustum/calibration.hpp"
#include "citywall/frustum/configuration.hpp"
#include "citywall/frustum/frustum.hpp"
#include "citywall/harness/harness.hpp"
#include "citywall/sync/web_server.hpp"

namespace citywall::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const std::optional<std::string>& path, const std::string& text) {
  if (!path) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + *path + "'");
  out << text << '\n';
}

int fail(const Error& e) {
  report_error(to_string(e.code()), e.what(), e.details());
  return kFailed;
}

std::pair<std::string, unsigned short> split_listen(const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::ParseError, "listen address must be host:port, got '" + listen + "'");
  }
  const std::string port_text = listen.substr(colon + 1);
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) port = -1;
  } catch (const std::exception&) {
  }
  if (port < 0 || port > 65535) {
    throw Error(ErrorCode::ParseError, "bad port in listen address '" + listen + "'");
  }
  return {listen.substr(0, colon), static_cast<unsigned short>(port)};
}

std::vector<ViewConfiguration> load_config_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::InvalidConfig, "config directory '" + dir + "' does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<ViewConfiguration> configs;
  for (const auto& file : files) {
    try {
      configs.push_back(frustum::make_configuration(
          frustum::parse_config_document(read_file(file.string()))));
    } catch (const Error& e) {
      throw Error(e.code(), file.string() + ": " + e.what(), e.details());
    }
  }
  return configs;
}

city::CityLayout build_layout(const std::string& structure_file,
                              const std::optional<std::string>& trace_file) {
  const auto model = city::ingest_structure(read_file(structure_file));
  std::vector<CommunicationLink> links;
  if (trace_file) {
    links = city::aggregate_traces(city::ingest_traces(read_file(*trace_file)), model).links;
  }
  return city::layout_city(model, links);
}

}  // namespace

void report_error(std::string_view code, const std::string& message,
                  const std::vector<std::string>& details) {
  json line = {{"error", code}, {"message", message}};
  if (!details.empty()) line["details"] = details;
  std::cerr << line.dump() << std::endl;
}

int cmd_serve(const ServeOptions& options) {
  try {
    const auto [address, port] = split_listen(options.listen);
    std::vector<ViewConfiguration> library;
    if (options.config_dir) library = load_config_dir(*options.config_dir);

    json layout = json::object({{"districts", json::array()},
                                {"buildings", json::array()},
                                {"arcs", json::array()}});
    if (options.structure_file) {
      layout = city::to_json(build_layout(*options.structure_file, options.trace_file));
    }

    sync::SyncServer server(std::move(library));
    json ids = server.default_config_ids();
    sync::ProtocolEndpoint endpoint(server);
    sync::WebServer web({address, port, options.threads, true}, endpoint, layout.dump(), ids.dump());
    try {
      web.start();
    } catch (const std::exception& e) {
      report_error("ListenFailed", e.what());
      return kFailed;
    }
    std::cout << "listening on " << address << ':' << web.port() << std::endl;
    web.wait_for_shutdown_signal();
    web.stop();
    return kOk;
  } catch (const Error& e) {
    return fail(e);
  }
}

int cmd_gen_grid(const GridOptions& options) {
  try {
    frustum::GridSpec spec;
    spec.rows = options.rows;
    spec.cols = options.cols;
    spec.tile_width = options.tile_width;
    spec.tile_height = options.tile_height;
    spec.eye_distance = options.eye_distance;
    spec.near_plane = options.near_plane;
    spec.far_plane = options.far_plane;
    spec.device_ids = options.ids;
    if (options.config_id) spec.config_id = *options.config_id;
    const auto config = frustum::grid_configuration(spec);
    write_output(options.out, frustum::dump_configuration(config));
    return kOk;
  } catch (const Error& e) {
    fail(e);
    return e.code() == ErrorCode::ParseError ? kFailed : kUsage;
  }
}

int cmd_convert_mpcdi(const ConvertOptions& options) {
  try {
    const auto regions = frustum::parse_calibration(read_file(options.input));
    std::vector<DeviceView> views;
    bool main_assigned = false;
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const auto& region = regions[i];
      DeviceId id(options.id_prefix + "-" + region.region_id);
      const bool is_main = options.main_id ? id.str() == *options.main_id : i == 0;
      main_assigned = main_assigned || is_main;
      views.push_back({std::move(id),
                       frustum::mpcdi_frustum(region.angles, options.near_plane,
                                              options.far_plane),
                       is_main ? Role::Main : Role::Auxiliary});
    }
    if (!main_assigned) {
      // A main node that drives no projector gets a plain symmetric view.
      const frustum::FrustumAngles symmetric(0, 0, 0, 45, 45, 45, 45);
      views.push_back({DeviceId(*options.main_id),
                       frustum::mpcdi_frustum(symmetric, options.near_plane,
                                              options.far_plane),
                       Role::Main});
    }
    const std::string config_id =
        options.config_id.value_or(fs::path(options.input).stem().string());
    const ViewConfiguration config(config_id, std::move(views));
    write_output(options.out, frustum::dump_configuration(config));
    return kOk;
  } catch (const Error& e) {
    return fail(e);
  }
}

int cmd_validate(const std::string& path) {
  try {
    const auto doc = frustum::parse_config_document(read_file(path));
    const auto diagnostics = frustum::validate_configuration(doc);
    json findings = json::array();
    bool has_error = false;
    for (const auto& d : diagnostics) {
      const bool error = d.severity == Severity::Error;
      has_error = has_error || error;
      findings.push_back({{"severity", error ? "error" : "warning"},
                          {"code", d.code},
                          {"subject", d.subject},
                          {"message", d.message}});
      if (error) report_error(d.code, format(d));
    }
    std::cout << json{{"configId", doc.config_id},
                      {"valid", !has_error},
                      {"diagnostics", std::move(findings)}}
                     .dump(2)
              << '\n';
    return has_error ? kFailed : kOk;
  } catch (const Error& e) {
    return fail(e);
  }
}

int cmd_layout(const LayoutOptions& options) {
  try {
    write_output(options.out,
                 city::to_json(build_layout(options.structure_file, options.trace_file)).dump(2));
    return kOk;
  } catch (const Error& e) {
    return fail(e);
  }
}

int cmd_simulate(const SimulateOptions& options) {
  try {
    const auto script = harness::load_scenario(options.scenario);
    const auto report = harness::run_scenario(script, options.seed);
    const auto consistency = harness::assert_consistent(report);
    auto out = harness::to_json(report);
    out["consistent"] = consistency.pass;
    out["diffs"] = consistency.diffs;
    write_output(options.out, out.dump(2));
    for (const auto& v : report.violations) {
      report_error("Violation", v.kind + " at " + std::to_string(v.at_ms) + " ms on '" +
                                    v.device + "': " + v.message);
    }
    if (!consistency.pass) report_error("Inconsistent", "final state differs", consistency.diffs);
    return report.violations.empty() && consistency.pass ? kOk : kFailed;
  } catch (const Error& e) {
    return fail(e);
  }
}

}  // namespace citywall::cli
