#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace citywall {

// Software structure: applications own root packages, packages own
// sub-packages and classes. Nodes live in flat arrays and refer to each other
// by index so that malformed graphs (shared children, cycles) stay
// representable and can be reported by validate_structure.
struct ClassNode {
  std::string name;
  std::int64_t method_count = 0;
};

struct PackageNode {
  std::string name;
  std::vector<std::size_t> sub_packages;
  std::vector<std::size_t> classes;
};

struct Application {
  std::string name;
  std::string language;
  std::vector<std::size_t> root_packages;
};

struct StructureModel {
  std::vector<Application> applications;
  std::vector<PackageNode> packages;
  std::vector<ClassNode> classes;

  std::size_t add_application(std::string name, std::string language);
  std::size_t add_root_package(std::size_t application, std::string name);
  std::size_t add_sub_package(std::size_t parent, std::string name);
  std::size_t add_class(std::size_t package, std::string name,
                        std::int64_t method_count);
};

struct StructureViolation {
  std::string kind;  // duplicate_fqn, package_cycle, shared_package, ...
  std::string path;  // dotted path of the offending entity
  std::string message;

  friend bool operator==(const StructureViolation&,
                         const StructureViolation&) = default;
};

// Empty iff the model is a forest of uniquely named classes.
std::vector<StructureViolation> validate_structure(const StructureModel& model);

struct CommunicationLink {
  std::string source_fqn;
  std::string target_fqn;
  std::uint64_t call_count = 0;

  friend auto operator<=>(const CommunicationLink&,
                          const CommunicationLink&) = default;
};

// Lookup tables over a valid model.
class StructureIndex {
 public:
  struct ClassInfo {
    std::size_t class_index;
    std::size_t application;
    std::string package_path;  // dotted, starts with the application name
  };

  explicit StructureIndex(const StructureModel& model);

  const ClassInfo* find_class(const std::string& fqn) const;
  // Resolves "app.pkg.Class.method" to the owning class FQN.
  std::optional<std::string> class_of_method(const std::string& method_fqn) const;

  const std::map<std::string, ClassInfo>& classes() const noexcept {
    return classes_;
  }

 private:
  std::map<std::string, ClassInfo> classes_;
};

}  // namespace citywall
