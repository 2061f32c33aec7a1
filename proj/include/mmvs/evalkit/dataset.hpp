#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmvs/evalkit/scene.hpp"
#include "mmvs/geometry/camera.hpp"
#include "mmvs/geometry/image.hpp"
#include "mmvs/masks/depth_map.hpp"

namespace mmvs::evalkit {

struct NeighbourView {
  geometry::ImageBuffer image;
  geometry::RelativePose pose;  // reference frame -> this view
};

/// Reference view, posed neighbours and analytic ground-truth depth.
struct Sample {
  std::string id;
  std::uint64_t seed = 0;
  geometry::CameraModel camera;
  geometry::ImageBuffer reference;
  std::vector<NeighbourView> neighbours;
  masks::DepthMap truth;

  void check() const;
};

/// Random neighbour motion. Translation direction is drawn per axis with the
/// given weights (0 disables an axis) and scaled to a magnitude in
/// [min_translation, max_translation]; rotation is about a random axis by an
/// angle in [-max_rotation_deg, max_rotation_deg].
struct MotionProfile {
  std::size_t neighbours = 2;
  double min_translation = 0.15;
  double max_translation = 0.35;
  double axis_weight_x = 1.0;
  double axis_weight_y = 0.5;
  double axis_weight_z = 0.3;
  double max_rotation_deg = 1.5;

  void check() const;
  static MotionProfile none(std::size_t neighbours = 2);
  static MotionProfile translation_x(double magnitude, std::size_t neighbours = 2);
};

geometry::RelativePose draw_pose(std::uint64_t seed, const MotionProfile& motion);

/// Fraction of reference pixels whose true surface point projects inside the
/// neighbour image.
double overlap_fraction(const Sample& sample, std::size_t neighbour);

/// Renders one Sample per scene. Each sample's motion is seeded from its
/// scene seed only, so results do not depend on list order. Throws if a
/// neighbour shares no pixels with the reference.
std::vector<Sample> build_dataset(const std::vector<SceneSpec>& specs,
                                  const geometry::CameraModel& camera, const MotionProfile& motion);

Sample build_sample(const SceneSpec& spec, const geometry::CameraModel& camera,
                    const MotionProfile& motion, std::string id);

/// Seed of scene `index` in a generator run seeded by `seed`.
std::uint64_t scene_seed(std::uint64_t seed, std::size_t index);

/// `count` random scenes seeded by scene_seed(seed, i), rendered with build_dataset.
std::vector<Sample> generate_dataset(std::uint64_t seed, std::size_t count, const geometry::CameraModel& camera,
                                     const SceneOptions& options, const MotionProfile& motion);

/// Default 64x48 camera used by the generator (fx = fy = 56).
geometry::CameraModel default_camera(std::size_t width = 64, std::size_t height = 48);

}  // namespace mmvs::evalkit
