#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mmvs/masks/depth_map.hpp"
#include "mmvs/sampling/planes.hpp"

namespace mmvs::masks {

/// Per-plane, per-pixel probability that the surface lies in front of (or
/// on) the plane. Layout is plane-major: values[(i * height + y) * width + x].
///
/// `validity` is empty or holds one flag per pixel; pixels flagged invalid
/// carry no supervision.
struct MultiplaneMask {
  std::size_t planes = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;
  std::vector<std::uint8_t> validity;

  std::size_t pixel_count() const { return height * width; }
  float at(std::size_t plane, std::size_t pixel) const { return values[plane * pixel_count() + pixel]; }
  bool valid(std::size_t pixel) const { return validity.empty() || validity[pixel] != 0; }
  void check() const;
  bool same_shape(const MultiplaneMask& other) const {
    return planes == other.planes && height == other.height && width == other.width;
  }
};

/// mask[i, p] = 1 when depth[p] <= planes[i], else 0. Invalid pixels get all
/// zeros and are flagged invalid.
MultiplaneMask make_ground_truth_masks(const DepthMap& depth, const sampling::PlaneSet& planes);

/// Element-wise mean over neighbours. A pixel stays valid only if it is
/// valid in every input.
MultiplaneMask fuse_masks(std::span<const MultiplaneMask> per_neighbour);

/// Decodes the profile of one pixel: running maximum, then the 0.5 crossing
/// linearly interpolated between the bracketing plane depths.
double decode_profile(std::span<const float> profile, std::span<const double> depths);

/// Per-pixel decode of a full mask stack. Output validity mirrors the mask's.
DepthMap decode_depth_from_masks(const MultiplaneMask& mask, const sampling::PlaneSet& planes);

}  // namespace mmvs::masks
