#pragma once

#include <Eigen/Core>

#include "mmvs/geometry/camera.hpp"

namespace mmvs::geometry {

/// Pixel-to-pixel mapping from the reference view into the neighbour view,
/// valid for points on one scene plane.
struct PlaneHomography {
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Identity();
  double plane_depth = 1.0;

  /// Maps reference pixel (x, y) to neighbour coordinates (u, v).
  Eigen::Vector2d apply(double x, double y) const;
};

/// H = K (R + t [0 0 1/depth]) K^-1 for the fronto-parallel plane at `depth`.
PlaneHomography homography_for_plane(const CameraModel& camera, const RelativePose& pose,
                                     double depth);

/// General plane n^T X = distance in the reference frame (n normalised
/// internally). The fronto-parallel overload is the n = (0, 0, 1) case.
PlaneHomography homography_for_plane(const CameraModel& camera, const RelativePose& pose,
                                     const Eigen::Vector3d& normal, double distance);

}  // namespace mmvs::geometry
