#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mmvs/masks/depth_map.hpp"
#include "mmvs/masks/multiplane_mask.hpp"
#include "mmvs/neural/network_config.hpp"
#include "mmvs/neural/tensor.hpp"
#include "mmvs/sampling/planes.hpp"

namespace mmvs::nn {

/// Binary mask supervision for `count` stacked samples: masks are
/// [count, planes, height, width], valid is [count, height, width].
struct MaskTarget {
  std::size_t count = 0;
  std::size_t planes = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> masks;
  std::vector<std::uint8_t> valid;
};

/// Inverse-depth supervision [count, 1, height, width].
struct InverseDepthTarget {
  std::size_t count = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;
  std::vector<std::uint8_t> valid;
};

/// Ground-truth masks at the given resolution. Each output cell covers the
/// input rows [floor(i H / h), ceil((i + 1) H / h)) and likewise for columns;
/// a plane is set when at least half of the valid depths in the cell lie on
/// or in front of it. Cells without valid depth are invalid.
MaskTarget pool_mask_target(const masks::DepthMap& depth, const sampling::PlaneSet& planes, Extent extent);

/// Inverse ground-truth depth averaged over the valid pixels of each cell.
InverseDepthTarget pool_inverse_depth_target(const masks::DepthMap& depth, Extent extent);

MaskTarget stack_targets(std::span<const MaskTarget> parts);
InverseDepthTarget stack_targets(std::span<const InverseDepthTarget> parts);

template <typename T>
struct LossBreakdown {
  Tensor<T> total;
  std::vector<double> per_scale;  // coarse to fine
};

/// MaskNet objective. `outputs` are the per-scale masks (coarse to fine) for
/// a batch whose rows come in runs of group_sizes[g] neighbours of sample g.
/// The finest scale is averaged over each group before the cross-entropy;
/// coarser scales are supervised per neighbour. The total is the mean of the
/// per-scale losses. `targets` holds one entry per scale, one row per group.
template <typename T>
LossBreakdown<T> mask_pyramid_loss(const std::vector<Tensor<T>>& outputs, std::span<const std::size_t> group_sizes,
                                   std::span<const MaskTarget> targets);

/// DispNet objective: sum over scales of weight * mean |prediction - target|
/// on valid pixels. Outputs, targets and weights are coarse to fine.
template <typename T>
LossBreakdown<T> multiscale_l1_loss(const std::vector<Tensor<T>>& outputs, std::span<const InverseDepthTarget> targets,
                                    std::span<const double> weights);

/// Cross-entropy of a predicted mask against binary truth over the pixels
/// valid in `truth`.
double bce_mask_loss(const masks::MultiplaneMask& predicted, const masks::MultiplaneMask& truth);

}  // namespace mmvs::nn
