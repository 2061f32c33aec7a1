#pragma once

#include <cstddef>
#include <span>

#include "mmvs/geometry/image.hpp"
#include "mmvs/geometry/warp.hpp"
#include "mmvs/masks/depth_map.hpp"
#include "mmvs/masks/multiplane_mask.hpp"
#include "mmvs/neural/tensor.hpp"

namespace mmvs::nn {

/// Stacks warp volumes of equal shape into [N, 3(1+D), H, W].
template <typename T>
Tensor<T> stack_volumes(std::span<const geometry::WarpVolume> volumes);

/// Stacks images of equal shape into [N, C, H, W].
template <typename T>
Tensor<T> stack_images(std::span<const geometry::ImageBuffer> images);

/// Stacks masks of equal shape into [N, D, H, W].
template <typename T>
Tensor<T> stack_masks(std::span<const masks::MultiplaneMask> stack);

/// Row `index` of an [N, D, H, W] tensor as a mask (validity left empty).
template <typename T>
masks::MultiplaneMask mask_from_tensor(const Tensor<T>& t, std::size_t index);

struct DepthConversion {
  masks::DepthMap depth;
  std::size_t floored = 0;  // pixels whose inverse depth was raised to the floor
};

/// Inverts row `index` of an [N, 1, H, W] inverse-depth tensor, raising
/// values below `floor` to `floor` first.
template <typename T>
DepthConversion depth_from_inverse(const Tensor<T>& t, std::size_t index, double floor = 1e-6);

}  // namespace mmvs::nn
