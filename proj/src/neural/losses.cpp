#include "mmvs/neural/losses.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "mmvs/neural/ops.hpp"

namespace mmvs::nn {

namespace {

struct CellRange {
  std::size_t begin;
  std::size_t end;
};

CellRange cell_range(std::size_t i, std::size_t in, std::size_t out) {
  return {i * in / out, ((i + 1) * in + out - 1) / out};
}

void require_extent(const masks::DepthMap& depth, Extent extent) {
  depth.check();
  if (extent.height == 0 || extent.width == 0 || extent.height > depth.height || extent.width > depth.width) {
    throw std::invalid_argument("target resolution must be non-empty and no finer than the depth map");
  }
}

}  // namespace

MaskTarget pool_mask_target(const masks::DepthMap& depth, const sampling::PlaneSet& planes, Extent extent) {
  require_extent(depth, extent);
  planes.check();
  const auto d = planes.size();
  const auto cells = extent.height * extent.width;
  MaskTarget t{1, d, extent.height, extent.width, std::vector<float>(d * cells, 0.0f),
               std::vector<std::uint8_t>(cells, 0)};
  std::vector<double> local;
  for (std::size_t cy = 0; cy < extent.height; ++cy) {
    const auto rows = cell_range(cy, depth.height, extent.height);
    for (std::size_t cx = 0; cx < extent.width; ++cx) {
      const auto cols = cell_range(cx, depth.width, extent.width);
      local.clear();
      for (auto y = rows.begin; y < rows.end; ++y) {
        for (auto x = cols.begin; x < cols.end; ++x) {
          const auto p = y * depth.width + x;
          if (depth.valid(p)) local.push_back(depth.values[p]);
        }
      }
      if (local.empty()) continue;
      const auto cell = cy * extent.width + cx;
      t.valid[cell] = 1;
      for (std::size_t i = 0; i < d; ++i) {
        const auto in_front = static_cast<std::size_t>(
            std::count_if(local.begin(), local.end(), [&](double v) { return v <= planes.depths[i]; }));
        t.masks[i * cells + cell] = 2 * in_front >= local.size() ? 1.0f : 0.0f;
      }
    }
  }
  return t;
}

InverseDepthTarget pool_inverse_depth_target(const masks::DepthMap& depth, Extent extent) {
  require_extent(depth, extent);
  const auto cells = extent.height * extent.width;
  InverseDepthTarget t{1, extent.height, extent.width, std::vector<float>(cells, 0.0f),
                       std::vector<std::uint8_t>(cells, 0)};
  for (std::size_t cy = 0; cy < extent.height; ++cy) {
    const auto rows = cell_range(cy, depth.height, extent.height);
    for (std::size_t cx = 0; cx < extent.width; ++cx) {
      const auto cols = cell_range(cx, depth.width, extent.width);
      double s = 0.0;
      std::size_t n = 0;
      for (auto y = rows.begin; y < rows.end; ++y) {
        for (auto x = cols.begin; x < cols.end; ++x) {
          const auto p = y * depth.width + x;
          if (!depth.valid(p)) continue;
          s += 1.0 / depth.values[p];
          ++n;
        }
      }
      if (n == 0) continue;
      const auto cell = cy * extent.width + cx;
      t.values[cell] = static_cast<float>(s / static_cast<double>(n));
      t.valid[cell] = 1;
    }
  }
  return t;
}

MaskTarget stack_targets(std::span<const MaskTarget> parts) {
  if (parts.empty()) throw std::invalid_argument("no targets to stack");
  MaskTarget out{0, parts[0].planes, parts[0].height, parts[0].width, {}, {}};
  for (const auto& p : parts) {
    if (p.planes != out.planes || p.height != out.height || p.width != out.width) {
      throw std::invalid_argument("mask targets disagree in shape");
    }
    out.count += p.count;
    out.masks.insert(out.masks.end(), p.masks.begin(), p.masks.end());
    out.valid.insert(out.valid.end(), p.valid.begin(), p.valid.end());
  }
  return out;
}

InverseDepthTarget stack_targets(std::span<const InverseDepthTarget> parts) {
  if (parts.empty()) throw std::invalid_argument("no targets to stack");
  InverseDepthTarget out{0, parts[0].height, parts[0].width, {}, {}};
  for (const auto& p : parts) {
    if (p.height != out.height || p.width != out.width) {
      throw std::invalid_argument("inverse-depth targets disagree in shape");
    }
    out.count += p.count;
    out.values.insert(out.values.end(), p.values.begin(), p.values.end());
    out.valid.insert(out.valid.end(), p.valid.begin(), p.valid.end());
  }
  return out;
}

template <typename T>
LossBreakdown<T> mask_pyramid_loss(const std::vector<Tensor<T>>& outputs, std::span<const std::size_t> group_sizes,
                                   std::span<const MaskTarget> targets) {
  if (outputs.empty() || outputs.size() != targets.size()) {
    throw std::invalid_argument("mask loss needs one target per output scale");
  }
  std::size_t rows = 0;
  for (auto g : group_sizes) rows += g;
  LossBreakdown<T> result;
  Tensor<T> total;
  for (std::size_t s = 0; s < outputs.size(); ++s) {
    const auto& out = outputs[s];
    const auto& tgt = targets[s];
    if (out.rank() != 4 || out.dim(0) != rows || out.dim(1) != tgt.planes || out.dim(2) != tgt.height ||
        out.dim(3) != tgt.width || tgt.count != group_sizes.size()) {
      throw std::invalid_argument("mask output " + shape_string(out.shape()) + " does not match its target at scale " +
                                  std::to_string(s));
    }
    Tensor<T> loss;
    if (s + 1 == outputs.size()) {
      loss = bce_loss(group_mean(out, group_sizes), std::span<const float>(tgt.masks), tgt.valid);
    } else {
      const auto mask_row = tgt.planes * tgt.height * tgt.width;
      const auto valid_row = tgt.height * tgt.width;
      std::vector<float> masks;
      std::vector<std::uint8_t> valid;
      masks.reserve(rows * mask_row);
      valid.reserve(rows * valid_row);
      for (std::size_t g = 0; g < group_sizes.size(); ++g) {
        for (std::size_t k = 0; k < group_sizes[g]; ++k) {
          masks.insert(masks.end(), tgt.masks.begin() + g * mask_row, tgt.masks.begin() + (g + 1) * mask_row);
          valid.insert(valid.end(), tgt.valid.begin() + g * valid_row, tgt.valid.begin() + (g + 1) * valid_row);
        }
      }
      loss = bce_loss(out, std::span<const float>(masks), valid);
    }
    result.per_scale.push_back(static_cast<double>(loss.item()));
    total = total.defined() ? add(total, loss) : loss;
  }
  result.total = scale(total, 1.0 / static_cast<double>(outputs.size()));
  return result;
}

template <typename T>
LossBreakdown<T> multiscale_l1_loss(const std::vector<Tensor<T>>& outputs, std::span<const InverseDepthTarget> targets,
                                    std::span<const double> weights) {
  if (outputs.empty() || outputs.size() != targets.size() || outputs.size() != weights.size()) {
    throw std::invalid_argument("L1 loss needs one target and one weight per output scale");
  }
  LossBreakdown<T> result;
  Tensor<T> total;
  for (std::size_t s = 0; s < outputs.size(); ++s) {
    const auto& tgt = targets[s];
    const auto& out = outputs[s];
    if (out.rank() != 4 || out.dim(0) != tgt.count || out.dim(2) != tgt.height || out.dim(3) != tgt.width) {
      throw std::invalid_argument("inverse-depth output " + shape_string(out.shape()) +
                                  " does not match its target at scale " + std::to_string(s));
    }
    const auto loss = l1_loss(out, std::span<const float>(tgt.values), tgt.valid);
    result.per_scale.push_back(static_cast<double>(loss.item()));
    const auto weighted = scale(loss, weights[s]);
    total = total.defined() ? add(total, weighted) : weighted;
  }
  result.total = total;
  return result;
}

double bce_mask_loss(const masks::MultiplaneMask& predicted, const masks::MultiplaneMask& truth) {
  if (!predicted.same_shape(truth)) throw std::invalid_argument("bce_mask_loss: shape mismatch");
  NoGradGuard guard;
  Tensor<double> pred({1, predicted.planes, predicted.height, predicted.width},
                      std::vector<double>(predicted.values.begin(), predicted.values.end()));
  std::vector<std::uint8_t> valid(truth.pixel_count(), 1);
  for (std::size_t p = 0; p < valid.size(); ++p) valid[p] = truth.valid(p) ? 1 : 0;
  return bce_loss(pred, std::span<const float>(truth.values), valid).item();
}

template LossBreakdown<float> mask_pyramid_loss(const std::vector<Tensor<float>>&, std::span<const std::size_t>,
                                                std::span<const MaskTarget>);
template LossBreakdown<double> mask_pyramid_loss(const std::vector<Tensor<double>>&, std::span<const std::size_t>,
                                                 std::span<const MaskTarget>);
template LossBreakdown<float> multiscale_l1_loss(const std::vector<Tensor<float>>&,
                                                 std::span<const InverseDepthTarget>, std::span<const double>);
template LossBreakdown<double> multiscale_l1_loss(const std::vector<Tensor<double>>&,
                                                  std::span<const InverseDepthTarget>, std::span<const double>);

}  // namespace mmvs::nn
