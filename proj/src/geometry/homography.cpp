#include "mmvs/geometry/homography.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace mmvs::geometry {

Eigen::Vector2d PlaneHomography::apply(double x, double y) const {
  const Eigen::Vector3d q = matrix * Eigen::Vector3d(x, y, 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

PlaneHomography homography_for_plane(const CameraModel& camera, const RelativePose& pose,
                                     const Eigen::Vector3d& normal, double distance) {
  if (!(distance > 0.0) || !std::isfinite(distance)) {
    throw std::invalid_argument("plane depth must be positive and finite");
  }
  if (!(normal.norm() > 0.0)) throw std::invalid_argument("plane normal must be non-zero");
  camera.check();
  pose.check();
  const Eigen::Vector3d n = normal.normalized();
  PlaneHomography h;
  h.plane_depth = distance;
  h.matrix = camera.intrinsics() *
             (pose.rotation + pose.translation * n.transpose() / distance) *
             camera.inverse_intrinsics();
  if (!h.matrix.allFinite() || std::abs(h.matrix.determinant()) <= 1e-12) {
    throw std::invalid_argument("plane homography is singular for this pose and depth");
  }
  return h;
}

PlaneHomography homography_for_plane(const CameraModel& camera, const RelativePose& pose,
                                     double depth) {
  return homography_for_plane(camera, pose, Eigen::Vector3d::UnitZ(), depth);
}

}  // namespace mmvs::geometry
