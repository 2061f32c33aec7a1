#include "mmvs/geometry/warp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmvs::geometry {

ImageBuffer warp_image(const ImageBuffer& neighbour, const PlaneHomography& h) {
  neighbour.check();
  const auto height = neighbour.height;
  const auto width = neighbour.width;
  ImageBuffer out = ImageBuffer::zeros(neighbour.channels, height, width);
  out.validity.assign(height * width, 0);
  const double max_x = static_cast<double>(width - 1);
  const double max_y = static_cast<double>(height - 1);
  const Eigen::Matrix3d& m = h.matrix;
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const Eigen::Vector3d q = m * Eigen::Vector3d(static_cast<double>(x), static_cast<double>(y), 1.0);
      if (!(q.z() > 0.0)) continue;
      const double u = q.x() / q.z();
      const double v = q.y() / q.z();
      if (!(u >= 0.0 && u <= max_x && v >= 0.0 && v <= max_y)) continue;
      const auto x0 = static_cast<std::size_t>(std::floor(u));
      const auto y0 = static_cast<std::size_t>(std::floor(v));
      const auto x1 = std::min(x0 + 1, width - 1);
      const auto y1 = std::min(y0 + 1, height - 1);
      const double ax = u - static_cast<double>(x0);
      const double ay = v - static_cast<double>(y0);
      for (std::size_t c = 0; c < neighbour.channels; ++c) {
        const double top = (1.0 - ax) * neighbour.at(c, y0, x0) + ax * neighbour.at(c, y0, x1);
        const double bottom = (1.0 - ax) * neighbour.at(c, y1, x0) + ax * neighbour.at(c, y1, x1);
        out.at(c, y, x) = static_cast<float>((1.0 - ay) * top + ay * bottom);
      }
      out.validity[y * width + x] = 1;
    }
  }
  return out;
}

WarpVolume build_warp_volume(const ImageBuffer& reference, const ImageBuffer& neighbour,
                             const CameraModel& camera, const RelativePose& pose,
                             const sampling::PlaneSet& planes) {
  camera.check();
  planes.check();
  reference.check();
  neighbour.check();
  if (reference.channels != 3 || neighbour.channels != 3) {
    throw std::invalid_argument("warp volume needs RGB reference and neighbour images");
  }
  if (reference.height != camera.height || reference.width != camera.width ||
      neighbour.height != camera.height || neighbour.width != camera.width) {
    throw std::invalid_argument("image dimensions do not match the camera");
  }
  const auto plane_size = 3 * camera.height * camera.width;
  const auto pixels = camera.height * camera.width;
  WarpVolume vol;
  vol.channels = 3 * (1 + planes.size());
  vol.height = camera.height;
  vol.width = camera.width;
  vol.data.resize(vol.channels * pixels);
  vol.validity.resize(planes.size() * pixels);
  std::copy(reference.data.begin(), reference.data.end(), vol.data.begin());
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const auto warped = warp_image(neighbour, homography_for_plane(camera, pose, planes.depths[i]));
    std::copy(warped.data.begin(), warped.data.end(),
              vol.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * plane_size));
    std::copy(warped.validity.begin(), warped.validity.end(),
              vol.validity.begin() + static_cast<std::ptrdiff_t>(i * pixels));
  }
  return vol;
}

}  // namespace mmvs::geometry
