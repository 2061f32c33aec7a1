#include "mmvs/geometry/camera.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <stdexcept>

namespace mmvs::geometry {

void CameraModel::check() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw std::invalid_argument("camera focal lengths must be positive (singular intrinsics)");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw std::invalid_argument("camera principal point must be finite");
  }
  if (width < 8 || height < 8) throw std::invalid_argument("camera image must be at least 8x8");
}

Eigen::Matrix3d CameraModel::intrinsics() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d CameraModel::inverse_intrinsics() const {
  check();
  Eigen::Matrix3d k;
  k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k;
}

RelativePose RelativePose::from_axis_angle(const Eigen::Vector3d& axis_angle,
                                           const Eigen::Vector3d& translation) {
  RelativePose p;
  const double angle = axis_angle.norm();
  if (angle > 0.0) {
    p.rotation = Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
  }
  p.translation = translation;
  return p;
}

void RelativePose::check(double tolerance) const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw std::invalid_argument("pose contains non-finite values");
  }
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tolerance) {
    throw std::invalid_argument("pose rotation is not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) > tolerance) {
    throw std::invalid_argument("pose rotation must have determinant +1");
  }
}

RelativePose RelativePose::inverse() const {
  RelativePose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

}  // namespace mmvs::geometry
