#pragma once

#include <utility>

#include "mmvs/evalkit/scene.hpp"
#include "mmvs/geometry/camera.hpp"
#include "mmvs/geometry/image.hpp"
#include "mmvs/masks/depth_map.hpp"

namespace mmvs::evalkit {

struct Rendering {
  geometry::ImageBuffer image;
  masks::DepthMap depth;
};

/// Ray-casts the scene through a camera placed by `pose` (reference frame to
/// camera frame). Each pixel records the nearest surface hit, so the depth is
/// the minimum over all covering layers. Throws if any ray misses every
/// surface in front of the camera.
Rendering render_scene(const SceneSpec& spec, const geometry::CameraModel& camera,
                       const geometry::RelativePose& pose);

}  // namespace mmvs::evalkit
