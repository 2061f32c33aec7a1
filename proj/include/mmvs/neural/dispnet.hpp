#pragma once

#include <array>
#include <vector>

#include "mmvs/neural/layers.hpp"
#include "mmvs/neural/network_config.hpp"

namespace mmvs::nn {

/// Encoder-decoder mapping [N, 3 + D, H, W] (reference RGB and fused masks)
/// to inverse depth.
///
/// Six stride-2 encoder convs (kernels 7, 5, 3, 3, 3, 3) with batchnorm and
/// LeakyReLU, a decoder with six skip connections (the last one is the input
/// itself), and conv + ReLU heads at six scales, so every output is >= 0.
template <typename T>
class DispNet {
 public:
  explicit DispNet(const NetworkConfig& config);

  /// Inverse depth [N, 1, h, w] per scale, coarse to fine.
  std::vector<Tensor<T>> forward(const Tensor<T>& input, bool training);

  const NetworkConfig& config() const { return config_; }
  ParameterStore<T>& store() { return store_; }
  const ParameterStore<T>& store() const { return store_; }

 private:
  struct ConvBn {
    Conv2d<T> conv;
    BatchNorm2d<T> bn;
  };

  NetworkConfig config_;
  ParameterStore<T> store_;
  std::mt19937_64 rng_;
  std::array<ConvBn, 6> encoder_;
  std::array<Conv2d<T>, 6> up_;
  std::array<ConvBn, 6> merge_;
  std::array<Conv2d<T>, 6> heads_;
};

}  // namespace mmvs::nn
