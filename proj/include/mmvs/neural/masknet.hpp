#pragma once

#include <array>
#include <vector>

#include "mmvs/neural/layers.hpp"
#include "mmvs/neural/network_config.hpp"

namespace mmvs::nn {

/// Encoder-decoder mapping a warp volume [N, 3(1+D), H, W] to plane masks.
///
/// Five stride-2 encoder convs (kernels 7, 5, 3, 3, 3), a decoder with skip
/// connections from the first four encoder stages, and sigmoid mask heads at
/// 1/8, 1/4, 1/2 and full resolution. Heads start at zero weight, so an
/// untrained model predicts 0.5 everywhere.
template <typename T>
class MaskNet {
 public:
  explicit MaskNet(const NetworkConfig& config);

  /// Masks [N, D, h, w] per scale, coarse to fine.
  std::vector<Tensor<T>> forward(const Tensor<T>& volume, bool training);

  const NetworkConfig& config() const { return config_; }
  ParameterStore<T>& store() { return store_; }
  const ParameterStore<T>& store() const { return store_; }

 private:
  struct ConvBn {
    Conv2d<T> conv;
    BatchNorm2d<T> bn;
  };
  ConvBn make_block(const std::string& name, std::size_t in, std::size_t out, std::size_t kernel,
                    std::size_t stride);
  Tensor<T> run(ConvBn& block, const Tensor<T>& x, bool training);

  NetworkConfig config_;
  ParameterStore<T> store_;
  std::mt19937_64 rng_;
  std::array<ConvBn, 5> encoder_;
  std::array<ConvBn, 4> up_;
  std::array<ConvBn, 4> merge_;
  ConvBn final_up_;
  ConvBn refine_;
  std::array<Conv2d<T>, 4> heads_;
};

}  // namespace mmvs::nn
