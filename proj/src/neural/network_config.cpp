#include "mmvs/neural/network_config.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mmvs::nn {

void NetworkConfig::check() const {
  if (planes < 1) throw std::invalid_argument("network config: need at least one plane");
  if (base_channels < 1) throw std::invalid_argument("network config: base_channels must be positive");
  if (input_height < 8 || input_width < 8) throw std::invalid_argument("network config: input must be at least 8x8");
  if (mask_scales != 4) throw std::invalid_argument("network config: MaskNet predicts exactly 4 scales");
  if (disp_scales != 6) throw std::invalid_argument("network config: DispNet predicts exactly 6 scales");
  if (loss_weights.size() != disp_scales) {
    throw std::invalid_argument("network config: expected " + std::to_string(disp_scales) + " loss weights, got " +
                                std::to_string(loss_weights.size()));
  }
  for (double w : loss_weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("network config: loss weights must be >= 0");
  }
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) throw std::invalid_argument("network config: bad leaky slope");
}

std::size_t downsampled(std::size_t n, std::size_t levels) {
  for (std::size_t i = 0; i < levels; ++i) n = (n + 1) / 2;
  return n;
}

std::vector<Extent> masknet_output_extents(std::size_t height, std::size_t width) {
  std::vector<Extent> out;
  for (std::size_t level = 3; level > 0; --level) out.push_back({downsampled(height, level), downsampled(width, level)});
  out.push_back({height, width});
  return out;
}

std::vector<Extent> dispnet_output_extents(std::size_t height, std::size_t width) {
  std::vector<Extent> out;
  for (std::size_t level = 5; level > 0; --level) out.push_back({downsampled(height, level), downsampled(width, level)});
  out.push_back({height, width});
  return out;
}

}  // namespace mmvs::nn
