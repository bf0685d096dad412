#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "citywall/city/ingest.hpp"
#include "citywall/core/structure.hpp"

namespace citywall::city {

struct TraceAggregation {
  std::vector<CommunicationLink> links;  // sorted by (source, target)
  std::uint64_t dropped_spans = 0;       // spans whose class is not modeled
  std::uint64_t self_calls = 0;          // parent/child pairs inside one class
  std::uint64_t orphan_spans = 0;        // parent id not found in the trace
};

// One link per ordered class pair, counting parent -> child span pairs whose
// methods live in different classes.
TraceAggregation aggregate_traces(const std::vector<TraceRecord>& records,
                                  const StructureModel& model);

struct LayoutParams {
  double building_footprint = 1.0;
  double height_per_method = 0.5;
  double min_height = 0.5;
  double max_height = 30.0;
  double gutter = 0.5;
  double slab_thickness = 0.2;
  double application_spacing = 4.0;
  double arc_lift = 0.3;
  double arc_width_scale = 0.1;
  double min_arc_width = 0.05;
  double max_arc_width = 1.0;
};

// Ground-plane rectangle: min corner (x, z) and extent along +x / +z.
struct Rect {
  double x = 0, z = 0, width = 0, depth = 0;

  double area() const { return width * depth; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct District {
  std::string package_path;  // application name for the root district
  std::size_t application = 0;
  std::size_t nesting = 0;   // 0 for the application district
  std::optional<std::size_t> parent;
  Rect rect;
  double elevation = 0;      // nesting * slab thickness
};

struct Building {
  std::string class_fqn;
  std::size_t district = 0;  // innermost district
  Rect rect;
  double base_elevation = 0;  // top of the district slab
  double height = 0;

  double roof() const { return base_elevation + height; }
};

struct Arc {
  std::string source_fqn;
  std::string target_fqn;
  std::uint64_t call_count = 0;
  std::array<Eigen::Vector3d, 3> control_points;  // quadratic Bezier, y up
  double width = 0;
  bool intra_application = true;
};

struct CityLayout {
  std::vector<District> districts;
  std::vector<Building> buildings;
  std::vector<Arc> arcs;
};

double building_height(std::int64_t method_count, const LayoutParams& params = {});
double arc_width(std::uint64_t call_count, const LayoutParams& params = {});

// Deterministic city: applications side by side along +x (sorted by name),
// packages as stacked district slabs, classes as buildings, links as arcs.
// Throws UnresolvedLink when a link endpoint is not a modeled class.
CityLayout layout_city(const StructureModel& model,
                       const std::vector<CommunicationLink>& links,
                       const LayoutParams& params = {});

nlohmann::json to_json(const CityLayout& layout);

}  // namespace citywall::city
