#include "citywall/core/projection.hpp"

#include <cmath>
#include <set>

namespace citywall {

MatrixInspection inspect_matrix(const Eigen::Matrix4d& m) {
  MatrixInspection out;
  out.finite = m.allFinite();
  if (!out.finite) return out;

  out.determinant = m.determinant();
  out.invertible = std::abs(out.determinant) > kMinDeterminant;
  if (!out.invertible) return out;

  // Unproject the clip-volume center; its homogeneous w is 1/clip_w, so a
  // positive value means the point sits in front of the camera.
  const Eigen::Vector4d center = m.inverse() * Eigen::Vector4d(0, 0, 0, 1);
  const bool in_front = std::isfinite(center.w()) && center.w() > 1e-15;
  const bool perspective = m.row(3).head<3>().norm() > 1e-12;
  out.forward_perspective = in_front && perspective;
  return out;
}

std::array<double, 16> to_column_major(const Eigen::Matrix4d& m) {
  std::array<double, 16> out{};
  Eigen::Map<Eigen::Matrix4d>(out.data()) = m;
  return out;
}

Eigen::Matrix4d from_column_major(std::span<const double, 16> values) {
  return Eigen::Map<const Eigen::Matrix4d>(values.data());
}

ProjectionMatrix::ProjectionMatrix(const Eigen::Matrix4d& m) : m_(m) {
  const auto check = inspect_matrix(m_);
  if (!check.finite) {
    throw Error(ErrorCode::InvariantViolation,
                "projection matrix has non-finite entries");
  }
  if (!check.invertible) {
    throw Error(ErrorCode::InvariantViolation,
                "projection matrix is not invertible (det=" +
                    std::to_string(check.determinant) + ")");
  }
  if (!check.forward_perspective) {
    throw Error(ErrorCode::InvariantViolation,
                "projection matrix is not a forward-looking perspective");
  }
}

ProjectionMatrix ProjectionMatrix::from_column_major(
    std::span<const double, 16> values) {
  return ProjectionMatrix(citywall::from_column_major(values));
}

std::array<double, 16> ProjectionMatrix::column_major() const {
  return to_column_major(m_);
}

std::string_view to_string(Role role) {
  return role == Role::Main ? "main" : "auxiliary";
}

Role parse_role(std::string_view text) {
  if (text == "main") return Role::Main;
  if (text == "auxiliary") return Role::Auxiliary;
  throw Error(ErrorCode::ParseError,
              "unknown role '" + std::string(text) + "'");
}

std::string format(const Diagnostic& d) {
  std::string out = d.severity == Severity::Error ? "error" : "warning";
  out += " [" + d.code + "]";
  if (!d.subject.empty()) out += " " + d.subject;
  out += ": " + d.message;
  return out;
}

std::vector<Diagnostic> structural_diagnostics(const ConfigDocument& doc) {
  std::vector<Diagnostic> out;
  if (doc.config_id.empty()) {
    out.push_back({Severity::Error, "empty_config_id", "", "configId is empty"});
  }
  if (doc.views.empty()) {
    out.push_back({Severity::Error, "no_views", doc.config_id,
                   "configuration has no views"});
  }

  std::set<std::string> seen;
  std::size_t mains = 0;
  for (const auto& v : doc.views) {
    if (!is_valid_identifier(v.device_id)) {
      out.push_back({Severity::Error, "bad_device_id", v.device_id,
                     "device id must be 1-64 chars of [A-Za-z0-9_-]"});
    }
    if (!seen.insert(v.device_id).second) {
      out.push_back({Severity::Error, "duplicate_device", v.device_id,
                     "device id appears more than once"});
    }
    if (v.role == "main") {
      ++mains;
    } else if (v.role != "auxiliary") {
      out.push_back({Severity::Error, "bad_role", v.device_id,
                     "role '" + v.role + "' is not main or auxiliary"});
    }
  }
  if (!doc.views.empty() && mains != 1) {
    out.push_back({Severity::Error, "main_count", doc.config_id,
                   "expected exactly one main view, found " +
                       std::to_string(mains)});
  }
  return out;
}

ConfigDocument to_document(const ViewConfiguration& config) {
  ConfigDocument doc;
  doc.config_id = config.id();
  for (const auto& v : config.views()) {
    doc.views.push_back({v.device_id.str(), std::string(to_string(v.role)),
                         v.projection.column_major()});
  }
  return doc;
}

ViewConfiguration::ViewConfiguration(std::string config_id,
                                     std::vector<DeviceView> views)
    : id_(std::move(config_id)), views_(std::move(views)) {
  auto diagnostics = structural_diagnostics(to_document(*this));
  if (!diagnostics.empty()) {
    std::vector<std::string> details;
    for (const auto& d : diagnostics) details.push_back(format(d));
    throw Error(ErrorCode::InvalidConfig,
                "configuration '" + id_ + "' is invalid", std::move(details));
  }
}

const DeviceView& ViewConfiguration::main_view() const {
  for (const auto& v : views_) {
    if (v.role == Role::Main) return v;
  }
  // Unreachable: the constructor guarantees exactly one main view.
  throw Error(ErrorCode::InvariantViolation, "configuration has no main view");
}

const DeviceView* ViewConfiguration::find(const DeviceId& device) const {
  for (const auto& v : views_) {
    if (v.device_id == device) return &v;
  }
  return nullptr;
}

}  // namespace citywall
