#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "citywall/core/identifiers.hpp"

namespace citywall {

// Smallest |det| accepted as invertible.
inline constexpr double kMinDeterminant = 1e-12;

// Geometric facts about an arbitrary 4x4 matrix, used both by the
// ProjectionMatrix constructor and by configuration diagnostics.
struct MatrixInspection {
  bool finite = false;
  bool invertible = false;
  // The clip-volume center unprojects to a finite point in front of the
  // camera (positive clip w) and w varies with position.
  bool forward_perspective = false;
  double determinant = 0.0;
};

MatrixInspection inspect_matrix(const Eigen::Matrix4d& m);

// Camera-to-clip transform for one device. Column vectors, right-handed view
// space, clip z in [-1, 1]. Stored and serialized column-major.
class ProjectionMatrix {
 public:
  // Throws InvariantViolation unless the matrix is finite, invertible and a
  // forward-looking perspective transform.
  explicit ProjectionMatrix(const Eigen::Matrix4d& m);

  static ProjectionMatrix from_column_major(std::span<const double, 16> values);

  const Eigen::Matrix4d& matrix() const noexcept { return m_; }
  std::array<double, 16> column_major() const;

  friend bool operator==(const ProjectionMatrix& a, const ProjectionMatrix& b) {
    return a.m_ == b.m_;
  }

 private:
  Eigen::Matrix4d m_;
};

std::array<double, 16> to_column_major(const Eigen::Matrix4d& m);
Eigen::Matrix4d from_column_major(std::span<const double, 16> values);

enum class Role { Main, Auxiliary };

std::string_view to_string(Role role);
// Throws ParseError for anything but "main" / "auxiliary".
Role parse_role(std::string_view text);

struct DeviceView {
  DeviceId device_id;
  ProjectionMatrix projection;
  Role role = Role::Auxiliary;

  friend bool operator==(const DeviceView&, const DeviceView&) = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;     // machine-readable, e.g. "duplicate_device"
  std::string subject;  // configId or deviceId the finding is about
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

std::string format(const Diagnostic& d);

// A named device -> projection assignment with exactly one main view.
class ViewConfiguration {
 public:
  // Throws InvalidConfig (details = diagnostics) on an empty id, no views,
  // not exactly one main view, or duplicate device ids.
  ViewConfiguration(std::string config_id, std::vector<DeviceView> views);

  const std::string& id() const noexcept { return id_; }
  const std::vector<DeviceView>& views() const noexcept { return views_; }

  const DeviceView& main_view() const;
  const DeviceView* find(const DeviceId& device) const;

  friend bool operator==(const ViewConfiguration&,
                         const ViewConfiguration&) = default;

 private:
  std::string id_;
  std::vector<DeviceView> views_;
};

// Unchecked form of a configuration as read from a file. Lets diagnostics
// describe documents that could never become a ViewConfiguration.
struct ConfigDocument {
  struct View {
    std::string device_id;
    std::string role;
    std::array<double, 16> projection{};
  };
  std::string config_id;
  std::vector<View> views;
};

ConfigDocument to_document(const ViewConfiguration& config);

// Structural checks only (ids, roles, uniqueness, main count).
std::vector<Diagnostic> structural_diagnostics(const ConfigDocument& doc);

}  // namespace citywall
