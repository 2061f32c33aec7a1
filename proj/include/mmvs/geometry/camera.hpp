#pragma once

#include <Eigen/Core>
#include <cstddef>

namespace mmvs::geometry {

/// Pinhole intrinsics. Pixel centres sit at integer coordinates with the
/// origin at the top-left pixel.
struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  std::size_t width = 0;
  std::size_t height = 0;

  /// Throws std::invalid_argument when fx, fy are not positive or the image
  /// is smaller than 8x8.
  void check() const;
  Eigen::Matrix3d intrinsics() const;
  Eigen::Matrix3d inverse_intrinsics() const;
};

/// Rigid transform taking reference-frame coordinates into the neighbour
/// frame: x_neighbour = rotation * x_reference + translation.
struct RelativePose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RelativePose identity() { return {}; }
  /// Rotation about a unit axis (Rodrigues) followed by a translation.
  static RelativePose from_axis_angle(const Eigen::Vector3d& axis_angle,
                                      const Eigen::Vector3d& translation);

  void check(double tolerance = 1e-9) const;
  RelativePose inverse() const;
  Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return rotation * x + translation; }
};

}  // namespace mmvs::geometry
