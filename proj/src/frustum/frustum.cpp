#include "citywall/frustum/frustum.hpp"

#include <cmath>

#include "citywall/core/error.hpp"

namespace citywall::frustum {

namespace {

constexpr double kAngleClearance = 1e-9;
constexpr double kMinEyeDistance = 1e-9;

void check_clip_range(double near_plane, double far_plane) {
  if (!(std::isfinite(near_plane) && std::isfinite(far_plane) &&
        near_plane > 0.0 && near_plane < far_plane)) {
    throw Error(ErrorCode::BadClipRange,
                "need 0 < near < far, got near=" + std::to_string(near_plane) +
                    " far=" + std::to_string(far_plane));
  }
}

}  // namespace

ScreenRect::ScreenRect(const Eigen::Vector3d& lower_left,
                       const Eigen::Vector3d& lower_right,
                       const Eigen::Vector3d& upper_left)
    : pa_(lower_left), pb_(lower_right), pc_(upper_left) {
  if (!(pa_.allFinite() && pb_.allFinite() && pc_.allFinite())) {
    throw Error(ErrorCode::InvariantViolation, "screen corners must be finite");
  }
  const Eigen::Vector3d u = pb_ - pa_;
  const Eigen::Vector3d v = pc_ - pa_;
  if (u.norm() <= 0.0 || v.norm() <= 0.0) {
    throw Error(ErrorCode::InvariantViolation, "screen has a zero-length edge");
  }
  if (std::abs(u.dot(v)) > 1e-9 * u.norm() * v.norm()) {
    throw Error(ErrorCode::InvariantViolation,
                "screen corners do not form a rectangle");
  }
}

ProjectionMatrix off_axis_projection(const ScreenRect& screen,
                                     const Eigen::Vector3d& eye,
                                     double near_plane, double far_plane) {
  check_clip_range(near_plane, far_plane);
  if (!eye.allFinite()) {
    throw Error(ErrorCode::InvariantViolation, "eye position must be finite");
  }
  const double d = eye_distance(screen.pa(), screen.pb(), screen.pc(), eye);
  if (!(d > kMinEyeDistance)) {
    throw Error(ErrorCode::EyeOnScreenPlane,
                "eye must be in front of the screen plane (distance " +
                    std::to_string(d) + ")");
  }
  return ProjectionMatrix(off_axis_matrix(screen.pa(), screen.pb(), screen.pc(),
                                          eye, near_plane, far_plane));
}

FrustumAngles::FrustumAngles(double yaw, double pitch, double roll,
                             double left_angle, double right_angle,
                             double up_angle, double down_angle)
    : yaw_(yaw),
      pitch_(pitch),
      roll_(roll),
      left_(left_angle),
      right_(right_angle),
      up_(up_angle),
      down_(down_angle) {
  const auto half_ok = [](double a) {
    return std::isfinite(a) && a > kAngleClearance && a < 90.0 - kAngleClearance;
  };
  const auto rot_ok = [](double a) {
    return std::isfinite(a) && a >= -180.0 && a <= 180.0;
  };
  if (!(half_ok(left_) && half_ok(right_) && half_ok(up_) && half_ok(down_))) {
    throw Error(ErrorCode::BadAngles,
                "frustum half-angles must lie strictly between 0 and 90 degrees");
  }
  if (!(rot_ok(yaw_) && rot_ok(pitch_) && rot_ok(roll_))) {
    throw Error(ErrorCode::BadAngles,
                "yaw/pitch/roll must lie in [-180, 180] degrees");
  }
}

FrustumExtents<double> extents(const FrustumAngles& angles, double near_plane,
                               double far_plane) {
  const double to_rad = M_PI / 180.0;
  return {-near_plane * std::tan(angles.left_angle() * to_rad),
          near_plane * std::tan(angles.right_angle() * to_rad),
          -near_plane * std::tan(angles.down_angle() * to_rad),
          near_plane * std::tan(angles.up_angle() * to_rad),
          near_plane,
          far_plane};
}

ProjectionMatrix mpcdi_frustum(const FrustumAngles& angles, double near_plane,
                               double far_plane) {
  check_clip_range(near_plane, far_plane);
  Eigen::Matrix4d view = Eigen::Matrix4d::Identity();
  view.topLeftCorner<3, 3>() =
      yaw_pitch_roll(angles.yaw(), angles.pitch(), angles.roll()).transpose();
  return ProjectionMatrix(
      perspective_matrix(extents(angles, near_plane, far_plane)) * view);
}

std::vector<ScreenRect> grid_screens(const GridSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) {
    throw Error(ErrorCode::InvariantViolation, "grid needs at least one tile");
  }
  if (!(spec.tile_width > 0.0 && spec.tile_height > 0.0 &&
        spec.eye_distance > 0.0)) {
    throw Error(ErrorCode::InvariantViolation,
                "tile size and eye distance must be positive");
  }
  const double wall_w = spec.cols * spec.tile_width;
  const double wall_h = spec.rows * spec.tile_height;
  const double z = -spec.eye_distance;

  std::vector<ScreenRect> screens;
  screens.reserve(static_cast<std::size_t>(spec.rows * spec.cols));
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const double x0 = -wall_w / 2.0 + c * spec.tile_width;
      const double y0 = wall_h / 2.0 - (r + 1) * spec.tile_height;
      screens.emplace_back(Eigen::Vector3d(x0, y0, z),
                           Eigen::Vector3d(x0 + spec.tile_width, y0, z),
                           Eigen::Vector3d(x0, y0 + spec.tile_height, z));
    }
  }
  return screens;
}

ViewConfiguration grid_configuration(const GridSpec& spec) {
  const auto tiles = static_cast<std::size_t>(spec.rows) *
                     static_cast<std::size_t>(spec.cols);
  if (spec.rows < 1 || spec.cols < 1 || tiles != spec.device_ids.size()) {
    throw Error(ErrorCode::CountMismatch,
                "grid " + std::to_string(spec.rows) + "x" +
                    std::to_string(spec.cols) + " needs " +
                    std::to_string(tiles) + " device ids, got " +
                    std::to_string(spec.device_ids.size()));
  }
  check_clip_range(spec.near_plane, spec.far_plane);

  const auto screens = grid_screens(spec);
  std::vector<DeviceView> views;
  views.reserve(screens.size());
  for (std::size_t i = 0; i < screens.size(); ++i) {
    views.push_back({DeviceId(spec.device_ids[i]),
                     off_axis_projection(screens[i], Eigen::Vector3d::Zero(),
                                         spec.near_plane, spec.far_plane),
                     i == 0 ? Role::Main : Role::Auxiliary});
  }
  std::string id = spec.config_id.empty()
                       ? "grid-" + std::to_string(spec.cols) + "x" +
                             std::to_string(spec.rows)
                       : spec.config_id;
  return ViewConfiguration(std::move(id), std::move(views));
}

}  // namespace citywall::frustum
