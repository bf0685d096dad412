// citywall: sync service, configuration tools and the scenario runner.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* value = std::getenv(name);
  return value && *value ? std::string(value) : std::move(fallback);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace citywall::cli;

  CLI::App app{"citywall: synchronized software-city visualization across display walls"};
  app.require_subcommand(1);

  ServeOptions serve;
  serve.listen = env_or("CITYWALL_LISTEN", serve.listen);
  if (const char* dir = std::getenv("CITYWALL_CONFIG_DIR"); dir && *dir) serve.config_dir = dir;
  auto* serve_cmd = app.add_subcommand("serve", "Run the sync service and layout endpoint");
  serve_cmd->add_option("--listen", serve.listen, "host:port (env CITYWALL_LISTEN)");
  serve_cmd->add_option("--configs", serve.config_dir,
                        "Directory of configuration files (env CITYWALL_CONFIG_DIR)");
  serve_cmd->add_option("--structure", serve.structure_file, "Structure JSON file");
  serve_cmd->add_option("--traces", serve.trace_file, "Trace JSON-lines file")
      ->needs(serve_cmd->get_option("--structure"));
  serve_cmd->add_option("--threads", serve.threads, "Worker threads (0 = one per core)");

  GridOptions grid;
  auto* grid_cmd = app.add_subcommand("gen-grid", "Generate a flat tiled-wall configuration");
  grid_cmd->add_option("--rows", grid.rows)->required()->check(CLI::Range(1, 64));
  grid_cmd->add_option("--cols", grid.cols)->required()->check(CLI::Range(1, 64));
  grid_cmd->add_option("--tile-w", grid.tile_width, "Tile width in meters")
      ->check(CLI::PositiveNumber);
  grid_cmd->add_option("--tile-h", grid.tile_height, "Tile height in meters")
      ->check(CLI::PositiveNumber);
  grid_cmd->add_option("--eye-dist", grid.eye_distance, "Eye-to-wall distance in meters")
      ->check(CLI::PositiveNumber);
  grid_cmd->add_option("--near", grid.near_plane)->check(CLI::PositiveNumber);
  grid_cmd->add_option("--far", grid.far_plane)->check(CLI::PositiveNumber);
  grid_cmd->add_option("--ids", grid.ids, "Device ids, row-major, first is main")
      ->required()
      ->delimiter(',');
  grid_cmd->add_option("--config-id", grid.config_id, "Defaults to grid-<cols>x<rows>");
  grid_cmd->add_option("--out", grid.out, "Output file (default stdout)");

  ConvertOptions convert;
  auto* convert_cmd =
      app.add_subcommand("convert-mpcdi", "Convert a calibration file to a configuration");
  convert_cmd->add_option("--in", convert.input)->required()->check(CLI::ExistingFile);
  convert_cmd->add_option("--near", convert.near_plane)->check(CLI::PositiveNumber);
  convert_cmd->add_option("--far", convert.far_plane)->check(CLI::PositiveNumber);
  convert_cmd->add_option("--id-prefix", convert.id_prefix, "Device ids are <prefix>-<regionId>");
  convert_cmd->add_option("--main-id", convert.main_id,
                          "Main device; added as an extra view if no region has this id");
  convert_cmd->add_option("--config-id", convert.config_id, "Defaults to the input file stem");
  convert_cmd->add_option("--out", convert.out, "Output file (default stdout)");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a configuration file");
  validate_cmd->add_option("file", validate_path)->required();

  LayoutOptions layout;
  auto* layout_cmd = app.add_subcommand("layout", "Compute the city layout export");
  layout_cmd->add_option("--structure", layout.structure_file)->required();
  layout_cmd->add_option("--traces", layout.trace_file);
  layout_cmd->add_option("--out", layout.out, "Output file (default stdout)");

  SimulateOptions simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a synchronization scenario");
  simulate_cmd->add_option("--scenario", simulate.scenario)->required();
  simulate_cmd->add_option("--seed", simulate.seed);
  simulate_cmd->add_option("--out", simulate.out, "Report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", e.what());
    return kUsage;
  }
  if (grid.near_plane >= grid.far_plane || convert.near_plane >= convert.far_plane) {
    report_error("UsageError", "--near must be smaller than --far");
    return kUsage;
  }

  if (*serve_cmd) return cmd_serve(serve);
  if (*grid_cmd) return cmd_gen_grid(grid);
  if (*convert_cmd) return cmd_convert_mpcdi(convert);
  if (*validate_cmd) return cmd_validate(validate_path);
  if (*layout_cmd) return cmd_layout(layout);
  return cmd_simulate(simulate);
}
