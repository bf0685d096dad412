#include "citywall/core/pose.hpp"

#include "citywall/core/error.hpp"

namespace citywall {

CameraPose::CameraPose(const Eigen::Vector3d& position,
                       const Eigen::Quaterniond& orientation, std::uint64_t seq)
    : position_(position), orientation_(orientation), seq_(seq) {
  if (!position_.allFinite()) {
    throw Error(ErrorCode::InvariantViolation, "pose position is not finite");
  }
  const double norm = orientation_.norm();
  if (!orientation_.coeffs().allFinite() || norm < 1e-9) {
    throw Error(ErrorCode::InvariantViolation,
                "pose orientation is not a usable quaternion");
  }
  orientation_.coeffs() /= norm;
}

CameraPose CameraPose::identity(std::uint64_t seq) {
  return {Eigen::Vector3d::Zero(), Eigen::Quaterniond::Identity(), seq};
}

}  // namespace citywall
