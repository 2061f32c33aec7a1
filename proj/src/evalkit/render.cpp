#include "mmvs/evalkit/render.hpp"

#include <limits>
#include <stdexcept>

namespace mmvs::evalkit {

Rendering render_scene(const SceneSpec& spec, const geometry::CameraModel& camera,
                       const geometry::RelativePose& pose) {
  spec.check();
  camera.check();
  pose.check();
  const auto h = camera.height;
  const auto w = camera.width;
  Rendering out;
  out.image = geometry::ImageBuffer::zeros(3, h, w);
  out.depth = masks::DepthMap::filled(h, w, 0.0);

  const Eigen::Matrix3d k_inv = camera.inverse_intrinsics();
  const Eigen::Matrix3d r_t = pose.rotation.transpose();
  const Eigen::Vector3d centre = -(r_t * pose.translation);

  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      // Camera-frame ray has unit z, so the ray parameter equals camera depth.
      const Eigen::Vector3d ray_cam = k_inv * Eigen::Vector3d(static_cast<double>(x), static_cast<double>(y), 1.0);
      const Eigen::Vector3d dir = r_t * ray_cam;
      double best = std::numeric_limits<double>::infinity();
      const Texture* texture = nullptr;
      Eigen::Vector3d hit;

      if (dir.z() > 0.0) {
        const double s = (spec.background_depth - centre.z()) / dir.z();
        if (s > 0.0) {
          best = s;
          texture = &spec.background;
          hit = centre + s * dir;
        }
      }
      for (const auto& layer : spec.layers) {
        const double denom = dir.z() - layer.slope_x * dir.x() - layer.slope_y * dir.y();
        if (denom == 0.0) continue;
        const double s = (layer.depth + layer.slope_x * (centre.x() - layer.centre_x()) +
                          layer.slope_y * (centre.y() - layer.centre_y()) - centre.z()) /
                         denom;
        if (!(s > 0.0) || s >= best) continue;
        const Eigen::Vector3d p = centre + s * dir;
        if (p.x() < layer.x_min || p.x() > layer.x_max || p.y() < layer.y_min || p.y() > layer.y_max) {
          continue;
        }
        best = s;
        texture = &layer.texture;
        hit = p;
      }
      if (texture == nullptr) {
        throw std::runtime_error("camera is behind every scene surface");
      }
      const auto colour = texture->sample(hit.x(), hit.y());
      for (std::size_t c = 0; c < 3; ++c) out.image.at(c, y, x) = colour[c];
      out.depth.values[y * w + x] = best;
    }
  }
  return out;
}

}  // namespace mmvs::evalkit
