#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace citywall::cli {

// Conventional exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailed = 1;  // validation failure, bad input data
inline constexpr int kUsage = 2;   // bad flags

struct ServeOptions {
  std::string listen = "0.0.0.0:8080";
  std::optional<std::string> config_dir;
  std::optional<std::string> structure_file;
  std::optional<std::string> trace_file;
  unsigned threads = 0;
};

struct GridOptions {
  int rows = 1;
  int cols = 1;
  double tile_width = 0.6;
  double tile_height = 0.34;
  double eye_distance = 0.7;
  double near_plane = 0.1;
  double far_plane = 1000.0;
  std::vector<std::string> ids;
  std::optional<std::string> config_id;
  std::optional<std::string> out;
};

struct ConvertOptions {
  std::string input;
  double near_plane = 0.1;
  double far_plane = 1000.0;
  std::string id_prefix = "projector";
  std::optional<std::string> main_id;
  std::optional<std::string> config_id;
  std::optional<std::string> out;
};

struct LayoutOptions {
  std::string structure_file;
  std::optional<std::string> trace_file;
  std::optional<std::string> out;
};

struct SimulateOptions {
  std::string scenario;
  std::uint64_t seed = 1;
  std::optional<std::string> out;
};

int cmd_serve(const ServeOptions& options);
int cmd_gen_grid(const GridOptions& options);
int cmd_convert_mpcdi(const ConvertOptions& options);
int cmd_validate(const std::string& path);
int cmd_layout(const LayoutOptions& options);
int cmd_simulate(const SimulateOptions& options);

// One JSON object per line on standard error.
void report_error(std::string_view code, const std::string& message,
                  const std::vector<std::string>& details = {});

}  // namespace citywall::cli
