#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace mmvs::nn {

struct NetworkConfig {
  std::size_t planes = 16;
  std::size_t base_channels = 8;
  std::size_t input_height = 48;
  std::size_t input_width = 64;
  std::size_t mask_scales = 4;
  std::size_t disp_scales = 6;
  /// DispNet loss weight per scale, coarse to fine.
  std::vector<double> loss_weights{0.1, 0.1, 0.1, 0.1, 0.1, 0.5};
  double leaky_slope = 0.1;
  std::uint64_t seed = 1;

  void check() const;
  std::size_t masknet_input_channels() const { return 3 * (1 + planes); }
  std::size_t dispnet_input_channels() const { return 3 + planes; }
};

/// Spatial size after `levels` stride-2 stages with padding k/2: each stage
/// maps n to ceil(n / 2).
std::size_t downsampled(std::size_t n, std::size_t levels);

struct Extent {
  std::size_t height = 0;
  std::size_t width = 0;
  bool operator==(const Extent&) const = default;
};

/// Mask output sizes, coarse to fine.
std::vector<Extent> masknet_output_extents(std::size_t height, std::size_t width);
/// Inverse-depth output sizes, coarse to fine.
std::vector<Extent> dispnet_output_extents(std::size_t height, std::size_t width);

}  // namespace mmvs::nn
