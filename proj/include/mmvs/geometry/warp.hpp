#pragma once

#include <cstdint>
#include <vector>

#include "mmvs/geometry/camera.hpp"
#include "mmvs/geometry/homography.hpp"
#include "mmvs/geometry/image.hpp"
#include "mmvs/sampling/planes.hpp"

namespace mmvs::geometry {

/// Pulls the neighbour image into reference geometry: output pixel p takes
/// the bilinear sample of `neighbour` at H p. Samples landing outside the
/// neighbour image are 0 and flagged invalid in the output validity mask.
ImageBuffer warp_image(const ImageBuffer& neighbour, const PlaneHomography& h);

/// Reference RGB followed by the neighbour warped onto each sweep plane:
/// channels [ref | plane 0 | ... | plane D-1], 3 (1 + D) in total.
struct WarpVolume {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;
  std::vector<std::uint8_t> validity;  // D x H x W, one slab per plane

  std::size_t plane_count() const { return channels / 3 - 1; }
};

WarpVolume build_warp_volume(const ImageBuffer& reference, const ImageBuffer& neighbour,
                             const CameraModel& camera, const RelativePose& pose,
                             const sampling::PlaneSet& planes);

}  // namespace mmvs::geometry
