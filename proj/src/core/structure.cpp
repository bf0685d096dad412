#include "citywall/core/structure.hpp"

#include <set>
#include <utility>

namespace citywall {

std::size_t StructureModel::add_application(std::string name,
                                            std::string language) {
  applications.push_back({std::move(name), std::move(language), {}});
  return applications.size() - 1;
}

std::size_t StructureModel::add_root_package(std::size_t application,
                                             std::string name) {
  packages.push_back({std::move(name), {}, {}});
  applications.at(application).root_packages.push_back(packages.size() - 1);
  return packages.size() - 1;
}

std::size_t StructureModel::add_sub_package(std::size_t parent,
                                            std::string name) {
  packages.push_back({std::move(name), {}, {}});
  packages.at(parent).sub_packages.push_back(packages.size() - 1);
  return packages.size() - 1;
}

std::size_t StructureModel::add_class(std::size_t package, std::string name,
                                      std::int64_t method_count) {
  classes.push_back({std::move(name), method_count});
  packages.at(package).classes.push_back(classes.size() - 1);
  return classes.size() - 1;
}

namespace {

bool is_valid_segment(const std::string& name) {
  return !name.empty() && name.find('.') == std::string::npos;
}

class StructureChecker {
 public:
  explicit StructureChecker(const StructureModel& model) : model_(model) {}

  std::vector<StructureViolation> run() {
    check_references();
    check_cycles();
    walk_tree();
    return std::move(out_);
  }

 private:
  void add(std::string kind, std::string path, std::string message) {
    out_.push_back({std::move(kind), std::move(path), std::move(message)});
  }

  bool package_ok(std::size_t i) const { return i < model_.packages.size(); }
  bool class_ok(std::size_t i) const { return i < model_.classes.size(); }

  void check_references() {
    std::vector<int> package_refs(model_.packages.size(), 0);
    std::vector<int> class_refs(model_.classes.size(), 0);

    std::set<std::string> app_names;
    for (const auto& app : model_.applications) {
      if (!is_valid_segment(app.name)) {
        add("invalid_name", app.name,
            "application name must be non-empty and contain no '.'");
      }
      if (!app_names.insert(app.name).second) {
        add("duplicate_application", app.name, "application name repeats");
      }
      for (auto p : app.root_packages) {
        if (!package_ok(p)) {
          add("dangling_reference", app.name,
              "root package index " + std::to_string(p) + " does not exist");
        } else {
          ++package_refs[p];
        }
      }
    }
    for (std::size_t i = 0; i < model_.packages.size(); ++i) {
      const auto& pkg = model_.packages[i];
      for (auto p : pkg.sub_packages) {
        if (!package_ok(p)) {
          add("dangling_reference", pkg.name,
              "sub-package index " + std::to_string(p) + " does not exist");
        } else {
          ++package_refs[p];
        }
      }
      for (auto c : pkg.classes) {
        if (!class_ok(c)) {
          add("dangling_reference", pkg.name,
              "class index " + std::to_string(c) + " does not exist");
        } else {
          ++class_refs[c];
        }
      }
    }
    for (std::size_t i = 0; i < package_refs.size(); ++i) {
      const auto& name = model_.packages[i].name;
      if (package_refs[i] > 1) {
        add("shared_package", name,
            "package is a child of " + std::to_string(package_refs[i]) +
                " parents");
      } else if (package_refs[i] == 0) {
        add("orphan_package", name, "package belongs to no application");
      }
    }
    for (std::size_t i = 0; i < class_refs.size(); ++i) {
      const auto& name = model_.classes[i].name;
      if (class_refs[i] > 1) {
        add("shared_class", name,
            "class is owned by " + std::to_string(class_refs[i]) + " packages");
      } else if (class_refs[i] == 0) {
        add("orphan_class", name, "class belongs to no package");
      }
    }
  }

  // Iterative three-colour DFS over the sub-package edges.
  void check_cycles() {
    enum Colour : unsigned char { White, Grey, Black };
    std::vector<Colour> colour(model_.packages.size(), White);
    for (std::size_t start = 0; start < model_.packages.size(); ++start) {
      if (colour[start] != White) continue;
      std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
      colour[start] = Grey;
      while (!stack.empty()) {
        auto& [node, next] = stack.back();
        const auto& subs = model_.packages[node].sub_packages;
        if (next == subs.size()) {
          colour[node] = Black;
          stack.pop_back();
          continue;
        }
        const std::size_t child = subs[next++];
        if (!package_ok(child)) continue;
        if (colour[child] == Grey) {
          std::string path;
          bool on_cycle = false;
          for (const auto& frame : stack) {
            if (frame.first == child) on_cycle = true;
            if (on_cycle) path += model_.packages[frame.first].name + ".";
          }
          path += model_.packages[child].name;
          add("package_cycle", path, "package nesting contains a cycle");
        } else if (colour[child] == White) {
          colour[child] = Grey;
          stack.emplace_back(child, 0);
        }
      }
    }
  }

  void walk_tree() {
    std::set<std::string> package_paths;
    std::set<std::string> fqns;
    std::vector<bool> visited(model_.packages.size(), false);

    for (const auto& app : model_.applications) {
      std::vector<std::pair<std::size_t, std::string>> stack;
      for (auto it = app.root_packages.rbegin(); it != app.root_packages.rend();
           ++it) {
        if (package_ok(*it)) stack.emplace_back(*it, app.name);
      }
      while (!stack.empty()) {
        auto [index, prefix] = std::move(stack.back());
        stack.pop_back();
        // Shared packages and cycles were reported already; visit once.
        if (visited[index]) continue;
        visited[index] = true;

        const auto& pkg = model_.packages[index];
        const std::string path = prefix + "." + pkg.name;
        if (!is_valid_segment(pkg.name)) {
          add("invalid_name", path,
              "package name must be non-empty and contain no '.'");
        }
        if (!package_paths.insert(path).second) {
          add("duplicate_package_path", path, "sibling packages share a name");
        }
        for (auto c : pkg.classes) {
          if (!class_ok(c)) continue;
          const auto& cls = model_.classes[c];
          const std::string fqn = path + "." + cls.name;
          if (!is_valid_segment(cls.name)) {
            add("invalid_name", fqn,
                "class name must be non-empty and contain no '.'");
          }
          if (cls.method_count < 0) {
            add("negative_method_count", fqn, "methodCount is negative");
          }
          if (!fqns.insert(fqn).second) {
            add("duplicate_fqn", fqn, "fully-qualified class name repeats");
          }
        }
        for (auto it = pkg.sub_packages.rbegin(); it != pkg.sub_packages.rend();
             ++it) {
          if (package_ok(*it)) stack.emplace_back(*it, path);
        }
      }
    }
  }

  const StructureModel& model_;
  std::vector<StructureViolation> out_;
};

}  // namespace

std::vector<StructureViolation> validate_structure(const StructureModel& model) {
  return StructureChecker(model).run();
}

StructureIndex::StructureIndex(const StructureModel& model) {
  for (std::size_t a = 0; a < model.applications.size(); ++a) {
    const auto& app = model.applications[a];
    std::vector<std::pair<std::size_t, std::string>> stack;
    for (auto p : app.root_packages) stack.emplace_back(p, app.name);
    while (!stack.empty()) {
      auto [index, prefix] = std::move(stack.back());
      stack.pop_back();
      const auto& pkg = model.packages.at(index);
      std::string path = prefix + "." + pkg.name;
      for (auto c : pkg.classes) {
        classes_.emplace(path + "." + model.classes.at(c).name,
                         ClassInfo{c, a, path});
      }
      for (auto p : pkg.sub_packages) stack.emplace_back(p, path);
    }
  }
}

const StructureIndex::ClassInfo* StructureIndex::find_class(
    const std::string& fqn) const {
  auto it = classes_.find(fqn);
  return it == classes_.end() ? nullptr : &it->second;
}

std::optional<std::string> StructureIndex::class_of_method(
    const std::string& method_fqn) const {
  const auto dot = method_fqn.rfind('.');
  if (dot == std::string::npos || dot == 0) return std::nullopt;
  std::string owner = method_fqn.substr(0, dot);
  if (classes_.count(owner) == 0) return std::nullopt;
  return owner;
}

}  // namespace citywall
