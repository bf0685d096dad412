#pragma once

#include <cstdint>

#include <Eigen/Geometry>

namespace citywall {

// Shared camera pose published by the main instance. The orientation is
// renormalized on construction; a zero or non-finite quaternion, or a
// non-finite position, throws InvariantViolation.
class CameraPose {
 public:
  CameraPose(const Eigen::Vector3d& position, const Eigen::Quaterniond& orientation,
             std::uint64_t seq);

  static CameraPose identity(std::uint64_t seq);

  const Eigen::Vector3d& position() const noexcept { return position_; }
  const Eigen::Quaterniond& orientation() const noexcept { return orientation_; }
  std::uint64_t seq() const noexcept { return seq_; }

  friend bool operator==(const CameraPose& a, const CameraPose& b) {
    return a.seq_ == b.seq_ && a.position_ == b.position_ &&
           a.orientation_.coeffs() == b.orientation_.coeffs();
  }

 private:
  Eigen::Vector3d position_;
  Eigen::Quaterniond orientation_;
  std::uint64_t seq_;
};

}  // namespace citywall
