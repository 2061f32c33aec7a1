#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mmvs/geometry/camera.hpp"

namespace mmvs::evalkit {

/// One sinusoidal texture component, frequencies in cycles per metre.
struct Wave {
  double freq_x = 0.0;
  double freq_y = 0.0;
  double phase = 0.0;
  std::array<float, 3> amplitude{};
};

/// Procedural band-limited texture defined in reference-frame metres, so
/// every view sees the same surface pattern.
struct Texture {
  std::array<float, 3> base_color{0.5f, 0.5f, 0.5f};
  std::vector<Wave> waves;
  double block_size = 0.0;  // metres; 0 disables the blockwise colour offsets
  float block_amplitude = 0.0f;
  std::uint64_t block_seed = 0;
  bool textureless = false;

  std::array<float, 3> sample(double x, double y) const;
};

/// Textured rectangle. Its surface is Z = depth + slope_x (X - centre_x) +
/// slope_y (Y - centre_y) in the reference frame, bounded by the X/Y extent.
struct Layer {
  double depth = 1.0;
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
  double slope_x = 0.0;
  double slope_y = 0.0;
  Texture texture;

  double centre_x() const { return 0.5 * (x_min + x_max); }
  double centre_y() const { return 0.5 * (y_min + y_max); }
  double surface_depth(double x, double y) const {
    return depth + slope_x * (x - centre_x()) + slope_y * (y - centre_y());
  }
  /// Smallest and largest depth over the rectangle corners.
  std::array<double, 2> depth_bounds() const;
};

/// Layers ordered near to far in front of an infinite fronto-parallel
/// background plane.
struct SceneSpec {
  std::uint64_t seed = 0;
  std::vector<Layer> layers;
  double background_depth = 10.0;
  Texture background;

  void check() const;
};

struct SceneOptions {
  double layer_min_depth = 1.0;
  double layer_max_depth = 6.0;
  double background_min_depth = 6.0;
  double background_max_depth = 10.0;
  std::size_t min_layers = 1;
  std::size_t max_layers = 3;
  double slant_probability = 0.3;
  double textureless_probability = 0.2;
  /// Image-space texture wavelengths are drawn from this range (pixels).
  double min_wavelength_px = 5.0;
  double max_wavelength_px = 16.0;

  /// Layers in [d_min, d_min + 0.6 (d_max - d_min)], background in the rest.
  static SceneOptions for_depth_range(double d_min, double d_max);
};

Texture random_texture(std::uint64_t seed, double depth, const geometry::CameraModel& camera,
                       const SceneOptions& options);
SceneSpec random_scene(std::uint64_t seed, const geometry::CameraModel& camera,
                       const SceneOptions& options);

/// Single fronto-parallel textured plane covering the whole view.
SceneSpec single_plane_scene(std::uint64_t seed, double depth, const geometry::CameraModel& camera,
                             const SceneOptions& options = {});

}  // namespace mmvs::evalkit
