#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the code it is used to check, apart from reading its output types.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "citywall/city/ingest.hpp"
#include "citywall/city/layout.hpp"
#include "citywall/core/structure.hpp"

namespace citywall::testing {

// Normalized device coordinates of a world point seen through `clip_from_eye`
// by an eye at `eye`.
Eigen::Vector3d to_ndc(const Eigen::Matrix4d& clip_from_eye, const Eigen::Vector3d& eye,
                       const Eigen::Vector3d& world);

// Textbook glFrustum matrix, written out entry by entry.
Eigen::Matrix4d gl_frustum(double l, double r, double b, double t, double n, double f);

// Random rectangle in space: random center, orientation, width and height.
struct RandomScreen {
  Eigen::Vector3d pa, pb, pc;
};
RandomScreen random_screen(std::mt19937_64& rng);

// Class FQNs by walking the structure JSON directly.
std::set<std::string> class_fqns_from_file(const std::string& structure_json);
std::size_t application_count_from_file(const std::string& structure_json);
std::size_t package_count_from_file(const std::string& structure_json);

// Parent/child class pairs counted by comparing every span against every
// other span. Keys are (source class, target class).
struct BruteForceLinks {
  std::map<std::pair<std::string, std::string>, std::uint64_t> links;
  std::uint64_t dropped_spans = 0;
};
BruteForceLinks brute_force_links(const std::vector<city::TraceRecord>& records,
                                  const std::set<std::string>& class_fqns);

// Random valid model: up to `max_apps` applications, packages nested at most
// `max_depth` deep, at most `max_classes` classes in total.
StructureModel random_model(std::mt19937_64& rng, int max_apps = 5, int max_depth = 4,
                            int max_classes = 200);

// Every layout invariant, checked from scratch. Empty means the layout is
// sound for this model.
std::vector<std::string> layout_problems(const StructureModel& model,
                                         const city::CityLayout& layout,
                                         const city::LayoutParams& params = {});

}  // namespace citywall::testing
