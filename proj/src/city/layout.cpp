#include "citywall/city/layout.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "citywall/core/error.hpp"

namespace citywall::city {

double building_height(std::int64_t method_count, const LayoutParams& params) {
  const double raw = params.height_per_method * static_cast<double>(method_count);
  return std::clamp(raw, params.min_height, params.max_height);
}

double arc_width(std::uint64_t call_count, const LayoutParams& params) {
  const double raw =
      params.arc_width_scale * std::log2(static_cast<double>(call_count) + 1.0);
  return std::clamp(raw, params.min_arc_width, params.max_arc_width);
}

namespace {

struct Offset {
  double x = 0, z = 0;
};

// District geometry relative to its own min corner.
struct LocalDistrict {
  std::string name;
  double width = 0, depth = 0;
  std::vector<std::pair<std::size_t, Offset>> children;  // into LocalCity::nodes
  std::vector<std::pair<std::size_t, Offset>> buildings;  // class indices
};

class CityBuilder {
 public:
  CityBuilder(const StructureModel& model, const LayoutParams& params)
      : model_(model), params_(params) {}

  CityLayout build(const std::vector<CommunicationLink>& links) {
    std::vector<std::size_t> apps(model_.applications.size());
    for (std::size_t i = 0; i < apps.size(); ++i) apps[i] = i;
    std::sort(apps.begin(), apps.end(), [&](std::size_t a, std::size_t b) {
      return model_.applications[a].name < model_.applications[b].name;
    });

    double cursor = 0.0;
    for (auto a : apps) {
      const auto& app = model_.applications[a];
      const auto root = pack(app.name, app.root_packages, {});
      place(root, a, app.name, 0, std::nullopt, cursor, 0.0);
      cursor += nodes_[root].width + params_.application_spacing;
    }

    for (const auto& link : links) layout_.arcs.push_back(make_arc(link));
    return std::move(layout_);
  }

 private:
  std::size_t pack(const std::string& name, const std::vector<std::size_t>& packages,
                   const std::vector<std::size_t>& classes) {
    const double g = params_.gutter;
    const double fp = params_.building_footprint;

    std::vector<std::size_t> subs;
    for (auto p : packages) {
      const auto& pkg = model_.packages[p];
      subs.push_back(pack(pkg.name, pkg.sub_packages, pkg.classes));
    }
    std::sort(subs.begin(), subs.end(), [&](std::size_t a, std::size_t b) {
      const double area_a = nodes_[a].width * nodes_[a].depth;
      const double area_b = nodes_[b].width * nodes_[b].depth;
      if (area_a != area_b) return area_a > area_b;
      return nodes_[a].name < nodes_[b].name;
    });

    LocalDistrict node;
    node.name = name;

    // Sub-districts: next-fit shelves against a near-square target width.
    double total = 0.0, widest = 0.0;
    for (auto s : subs) {
      total += (nodes_[s].width + g) * (nodes_[s].depth + g);
      widest = std::max(widest, nodes_[s].width);
    }
    const double target = std::max(widest, std::sqrt(total) - g);
    double x = 0.0, z = 0.0, shelf = 0.0, sub_w = 0.0, sub_d = 0.0;
    for (auto s : subs) {
      const auto& child = nodes_[s];
      if (x > 0.0 && x + child.width > target) {
        z += shelf + g;
        x = 0.0;
        shelf = 0.0;
      }
      node.children.emplace_back(s, Offset{g + x, g + z});
      sub_w = std::max(sub_w, x + child.width);
      shelf = std::max(shelf, child.depth);
      x += child.width + g;
    }
    if (!subs.empty()) sub_d = z + shelf;

    // Buildings: uniform shelves below the sub-districts. The column count
    // only grows with the class count, so adding a class never shrinks the
    // district.
    std::vector<std::size_t> cls(classes);
    std::sort(cls.begin(), cls.end(), [&](std::size_t a, std::size_t b) {
      return model_.classes[a].name < model_.classes[b].name;
    });
    const std::size_t n = cls.size();
    double bld_w = 0.0, bld_d = 0.0;
    if (n > 0) {
      std::size_t square = 1;
      while (square * square < n) ++square;
      const auto fill = static_cast<std::size_t>(std::floor((sub_w + g) / (fp + g)));
      const std::size_t cols = std::max({square, fill, std::size_t{1}});
      const std::size_t rows = (n + cols - 1) / cols;
      const std::size_t used = std::min(n, cols);
      bld_w = used * fp + (used - 1) * g;
      bld_d = rows * fp + (rows - 1) * g;
      const double top = g + sub_d + (subs.empty() ? 0.0 : g);
      for (std::size_t i = 0; i < n; ++i) {
        node.buildings.emplace_back(
            cls[i], Offset{g + (i % cols) * (fp + g), top + (i / cols) * (fp + g)});
      }
    }

    double inner_w = std::max(sub_w, bld_w);
    double inner_d = sub_d + bld_d + (!subs.empty() && n > 0 ? g : 0.0);
    if (subs.empty() && n == 0) inner_w = inner_d = fp;
    node.width = inner_w + 2 * g;
    node.depth = inner_d + 2 * g;

    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

  void place(std::size_t node_index, std::size_t app, const std::string& path,
             std::size_t nesting, std::optional<std::size_t> parent, double x,
             double z) {
    const auto& node = nodes_[node_index];
    District d;
    d.package_path = path;
    d.application = app;
    d.nesting = nesting;
    d.parent = parent;
    d.rect = {x, z, node.width, node.depth};
    d.elevation = static_cast<double>(nesting) * params_.slab_thickness;
    layout_.districts.push_back(d);
    const std::size_t self = layout_.districts.size() - 1;

    for (const auto& [cls, off] : node.buildings) {
      const auto& c = model_.classes[cls];
      Building b;
      b.class_fqn = path + "." + c.name;
      b.district = self;
      b.rect = {x + off.x, z + off.z, params_.building_footprint,
                params_.building_footprint};
      b.base_elevation = d.elevation + params_.slab_thickness;
      b.height = building_height(c.method_count, params_);
      building_by_fqn_[b.class_fqn] = layout_.buildings.size();
      layout_.buildings.push_back(std::move(b));
    }
    for (const auto& [child, off] : node.children) {
      place(child, app, path + "." + nodes_[child].name, nesting + 1, self,
            x + off.x, z + off.z);
    }
  }

  Arc make_arc(const CommunicationLink& link) const {
    const auto source = building_by_fqn_.find(link.source_fqn);
    const auto target = building_by_fqn_.find(link.target_fqn);
    if (source == building_by_fqn_.end() || target == building_by_fqn_.end()) {
      throw Error(ErrorCode::UnresolvedLink, "link " + link.source_fqn + " -> " +
                                                 link.target_fqn +
                                                 " names a class missing from the model");
    }
    if (link.source_fqn == link.target_fqn || link.call_count == 0) {
      throw Error(ErrorCode::InvariantViolation,
                  "link " + link.source_fqn +
                      " must join two classes with a positive call count");
    }
    const auto& a = layout_.buildings[source->second];
    const auto& b = layout_.buildings[target->second];
    const Eigen::Vector3d pa(a.rect.x + a.rect.width / 2, a.roof(),
                             a.rect.z + a.rect.depth / 2);
    const Eigen::Vector3d pb(b.rect.x + b.rect.width / 2, b.roof(),
                             b.rect.z + b.rect.depth / 2);
    const double span = std::hypot(pb.x() - pa.x(), pb.z() - pa.z());
    const Eigen::Vector3d apex((pa.x() + pb.x()) / 2,
                               std::max(a.roof(), b.roof()) + params_.arc_lift * span,
                               (pa.z() + pb.z()) / 2);

    Arc arc;
    arc.source_fqn = link.source_fqn;
    arc.target_fqn = link.target_fqn;
    arc.call_count = link.call_count;
    arc.control_points = {pa, apex, pb};
    arc.width = arc_width(link.call_count, params_);
    arc.intra_application =
        layout_.districts[a.district].application ==
        layout_.districts[b.district].application;
    return arc;
  }

  const StructureModel& model_;
  const LayoutParams& params_;
  std::vector<LocalDistrict> nodes_;
  CityLayout layout_;
  std::map<std::string, std::size_t> building_by_fqn_;
};

}  // namespace

CityLayout layout_city(const StructureModel& model,
                       const std::vector<CommunicationLink>& links,
                       const LayoutParams& params) {
  return CityBuilder(model, params).build(links);
}

nlohmann::json to_json(const CityLayout& layout) {
  using nlohmann::json;
  const auto rect = [](const Rect& r) {
    return json{{"x", r.x}, {"z", r.z}, {"width", r.width}, {"depth", r.depth}};
  };
  json districts = json::array();
  for (const auto& d : layout.districts) {
    districts.push_back({{"packagePath", d.package_path},
                         {"application", d.application},
                         {"nesting", d.nesting},
                         {"parent", d.parent ? json(*d.parent) : json(nullptr)},
                         {"rect", rect(d.rect)},
                         {"elevation", d.elevation}});
  }
  json buildings = json::array();
  for (const auto& b : layout.buildings) {
    buildings.push_back({{"classFqn", b.class_fqn},
                         {"district", b.district},
                         {"rect", rect(b.rect)},
                         {"baseElevation", b.base_elevation},
                         {"height", b.height}});
  }
  json arcs = json::array();
  for (const auto& a : layout.arcs) {
    json points = json::array();
    for (const auto& p : a.control_points) points.push_back({p.x(), p.y(), p.z()});
    arcs.push_back({{"sourceFqn", a.source_fqn},
                    {"targetFqn", a.target_fqn},
                    {"callCount", a.call_count},
                    {"controlPoints", std::move(points)},
                    {"width", a.width},
                    {"intraApplication", a.intra_application}});
  }
  return {{"districts", std::move(districts)},
          {"buildings", std::move(buildings)},
          {"arcs", std::move(arcs)}};
}

}  // namespace citywall::city
