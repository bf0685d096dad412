#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "citywall/core/projection.hpp"

namespace citywall::frustum {

// Clip convention used throughout: right-handed view space looking down -Z,
// column vectors, clip z in [-1, 1] (near -> -1, far -> +1).

// Near-plane window of an asymmetric perspective frustum.
template <typename Scalar>
struct FrustumExtents {
  Scalar left, right, bottom, top, near_plane, far_plane;
};

// Textbook asymmetric perspective matrix for the given near-plane window.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> perspective_matrix(const FrustumExtents<Scalar>& e) {
  const Scalar n = e.near_plane;
  const Scalar f = e.far_plane;
  Eigen::Matrix<Scalar, 4, 4> p = Eigen::Matrix<Scalar, 4, 4>::Zero();
  p(0, 0) = Scalar(2) * n / (e.right - e.left);
  p(0, 2) = (e.right + e.left) / (e.right - e.left);
  p(1, 1) = Scalar(2) * n / (e.top - e.bottom);
  p(1, 2) = (e.top + e.bottom) / (e.top - e.bottom);
  p(2, 2) = -(f + n) / (f - n);
  p(2, 3) = Scalar(-2) * f * n / (f - n);
  p(3, 2) = Scalar(-1);
  return p;
}

// Orthonormal screen frame: right, up, normal (towards the viewer).
template <typename Scalar>
struct ScreenBasis {
  Eigen::Matrix<Scalar, 3, 1> right, up, normal;
};

template <typename Derived>
ScreenBasis<typename Derived::Scalar> screen_basis(
    const Eigen::MatrixBase<Derived>& pa, const Eigen::MatrixBase<Derived>& pb,
    const Eigen::MatrixBase<Derived>& pc) {
  using Scalar = typename Derived::Scalar;
  ScreenBasis<Scalar> basis;
  basis.right = (pb - pa).normalized();
  basis.up = (pc - pa).normalized();
  basis.normal = basis.right.cross(basis.up).normalized();
  return basis;
}

// Signed distance from the eye to the screen plane, positive in front.
template <typename Derived>
typename Derived::Scalar eye_distance(const Eigen::MatrixBase<Derived>& pa,
                                      const Eigen::MatrixBase<Derived>& pb,
                                      const Eigen::MatrixBase<Derived>& pc,
                                      const Eigen::MatrixBase<Derived>& eye) {
  return -screen_basis(pa, pb, pc).normal.dot(pa - eye);
}

// Generalized off-axis projection: the frustum whose near-plane window is the
// screen rectangle pa (lower-left), pb (lower-right), pc (upper-left) seen
// from `eye`, premultiplied onto the rotation that aligns the screen frame
// with the view axes. Camera space is centered on the eye, so callers project
// `world - eye`. No precondition checks; see off_axis_projection.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 4, 4> off_axis_matrix(
    const Eigen::MatrixBase<Derived>& pa, const Eigen::MatrixBase<Derived>& pb,
    const Eigen::MatrixBase<Derived>& pc, const Eigen::MatrixBase<Derived>& eye,
    typename Derived::Scalar near_plane, typename Derived::Scalar far_plane) {
  using Scalar = typename Derived::Scalar;
  const auto basis = screen_basis(pa, pb, pc);

  const Eigen::Matrix<Scalar, 3, 1> va = pa - eye;
  const Eigen::Matrix<Scalar, 3, 1> vb = pb - eye;
  const Eigen::Matrix<Scalar, 3, 1> vc = pc - eye;
  const Scalar d = -va.dot(basis.normal);
  const Scalar scale = near_plane / d;

  FrustumExtents<Scalar> e{basis.right.dot(va) * scale,
                           basis.right.dot(vb) * scale,
                           basis.up.dot(va) * scale,
                           basis.up.dot(vc) * scale,
                           near_plane,
                           far_plane};

  Eigen::Matrix<Scalar, 4, 4> rotation = Eigen::Matrix<Scalar, 4, 4>::Identity();
  rotation.template block<1, 3>(0, 0) = basis.right.transpose();
  rotation.template block<1, 3>(1, 0) = basis.up.transpose();
  rotation.template block<1, 3>(2, 0) = basis.normal.transpose();
  return perspective_matrix(e) * rotation;
}

// Device orientation relative to the shared camera: yaw about +Y, then pitch
// about +X, then roll about +Z (intrinsic), angles in degrees.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> yaw_pitch_roll(Scalar yaw_deg, Scalar pitch_deg,
                                           Scalar roll_deg) {
  using Axis = Eigen::AngleAxis<Scalar>;
  using Vec = Eigen::Matrix<Scalar, 3, 1>;
  const Scalar to_rad = Scalar(M_PI) / Scalar(180);
  return (Axis(yaw_deg * to_rad, Vec::UnitY()) *
          Axis(pitch_deg * to_rad, Vec::UnitX()) *
          Axis(roll_deg * to_rad, Vec::UnitZ()))
      .toRotationMatrix();
}

// Planar display rectangle in world space (meters).
class ScreenRect {
 public:
  // Throws InvariantViolation unless the corners span a non-degenerate
  // rectangle (edges orthogonal to within 1e-9 in cosine).
  ScreenRect(const Eigen::Vector3d& lower_left, const Eigen::Vector3d& lower_right,
             const Eigen::Vector3d& upper_left);

  const Eigen::Vector3d& pa() const noexcept { return pa_; }
  const Eigen::Vector3d& pb() const noexcept { return pb_; }
  const Eigen::Vector3d& pc() const noexcept { return pc_; }
  Eigen::Vector3d pd() const { return pb_ + pc_ - pa_; }

 private:
  Eigen::Vector3d pa_, pb_, pc_;
};

ProjectionMatrix off_axis_projection(const ScreenRect& screen,
                                     const Eigen::Vector3d& eye,
                                     double near_plane, double far_plane);

// Angles in degrees. Half-angles must lie in (0, 90) with 1e-9 clearance;
// yaw/pitch/roll in [-180, 180]. Violations throw BadAngles.
class FrustumAngles {
 public:
  FrustumAngles(double yaw, double pitch, double roll, double left_angle,
                double right_angle, double up_angle, double down_angle);

  double yaw() const noexcept { return yaw_; }
  double pitch() const noexcept { return pitch_; }
  double roll() const noexcept { return roll_; }
  double left_angle() const noexcept { return left_; }
  double right_angle() const noexcept { return right_; }
  double up_angle() const noexcept { return up_; }
  double down_angle() const noexcept { return down_; }

  friend bool operator==(const FrustumAngles&, const FrustumAngles&) = default;

 private:
  double yaw_, pitch_, roll_, left_, right_, up_, down_;
};

FrustumExtents<double> extents(const FrustumAngles& angles, double near_plane,
                               double far_plane);

// P * R for a calibration frustum; R rotates camera space into the device
// frame given by yaw_pitch_roll.
ProjectionMatrix mpcdi_frustum(const FrustumAngles& angles, double near_plane,
                               double far_plane);

struct GridSpec {
  int rows = 1;
  int cols = 1;
  double tile_width = 1.0;
  double tile_height = 1.0;
  double eye_distance = 1.0;
  double near_plane = 0.1;
  double far_plane = 1000.0;
  std::vector<std::string> device_ids;  // row-major, top row first
  std::string config_id;                // defaults to "grid-<cols>x<rows>" (width first)
};

// Tiles of a flat wall centered on the eye axis at z = -eye_distance, eye at
// the origin; row-major with row 0 at the top.
std::vector<ScreenRect> grid_screens(const GridSpec& spec);

// One view per tile; the first device is main. Throws CountMismatch when
// rows*cols differs from the number of ids.
ViewConfiguration grid_configuration(const GridSpec& spec);

}  // namespace citywall::frustum
