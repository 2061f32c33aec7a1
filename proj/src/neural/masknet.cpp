#include "mmvs/neural/masknet.hpp"

#include <stdexcept>
#include <string>

#include "mmvs/neural/ops.hpp"

namespace mmvs::nn {

template <typename T>
typename MaskNet<T>::ConvBn MaskNet<T>::make_block(const std::string& name, std::size_t in, std::size_t out,
                                                   std::size_t kernel, std::size_t stride) {
  LayerSpec spec{LayerKind::kConv, kernel, stride, in, out};
  ConvBn block;
  block.conv = Conv2d<T>(store_, "masknet." + name + ".conv", spec, rng_, false);
  block.bn = BatchNorm2d<T>(store_, "masknet." + name + ".bn", out);
  return block;
}

template <typename T>
Tensor<T> MaskNet<T>::run(ConvBn& block, const Tensor<T>& x, bool training) {
  return relu(block.bn(block.conv(x), training));
}

template <typename T>
MaskNet<T>::MaskNet(const NetworkConfig& config) : config_(config), rng_(config.seed) {
  config_.check();
  const auto b = config_.base_channels;
  const std::array<std::size_t, 5> width{b, 2 * b, 4 * b, 8 * b, 8 * b};
  const std::array<std::size_t, 5> kernel{7, 5, 3, 3, 3};
  std::size_t in = config_.masknet_input_channels();
  for (std::size_t i = 0; i < 5; ++i) {
    encoder_[i] = make_block("enc" + std::to_string(i + 1), in, width[i], kernel[i], 2);
    in = width[i];
  }
  // Decoder stage s upsamples to encoder level 4 - s and merges its skip.
  const std::array<std::size_t, 4> dec_width{8 * b, 4 * b, 2 * b, b};
  std::size_t prev = width[4];
  for (std::size_t s = 0; s < 4; ++s) {
    const auto skip = width[3 - s];
    up_[s] = make_block("up" + std::to_string(s + 1), prev, dec_width[s], 3, 1);
    merge_[s] = make_block("merge" + std::to_string(s + 1), dec_width[s] + skip, dec_width[s], 3, 1);
    prev = dec_width[s];
  }
  final_up_ = make_block("up5", b, b, 3, 1);
  refine_ = make_block("refine", b, b, 3, 1);
  const std::array<std::size_t, 4> head_in{4 * b, 2 * b, b, b};
  for (std::size_t h = 0; h < 4; ++h) {
    LayerSpec spec{LayerKind::kConv, 3, 1, head_in[h], config_.planes};
    heads_[h] = Conv2d<T>(store_, "masknet.head" + std::to_string(h + 1), spec, rng_, true, WeightInit::kZero);
  }
}

template <typename T>
std::vector<Tensor<T>> MaskNet<T>::forward(const Tensor<T>& volume, bool training) {
  if (volume.rank() != 4 || volume.dim(1) != config_.masknet_input_channels()) {
    throw std::invalid_argument("MaskNet expects " + std::to_string(config_.masknet_input_channels()) +
                                " input channels for D=" + std::to_string(config_.planes) + ", got " +
                                shape_string(volume.shape()));
  }
  std::array<Tensor<T>, 5> enc;
  Tensor<T> x = volume;
  for (std::size_t i = 0; i < 5; ++i) {
    x = run(encoder_[i], x, training);
    enc[i] = x;
  }
  std::vector<Tensor<T>> outputs;
  for (std::size_t s = 0; s < 4; ++s) {
    const auto& skip = enc[3 - s];
    x = run(up_[s], upsample_nearest(x, skip.dim(2), skip.dim(3)), training);
    const std::array<Tensor<T>, 2> parts{x, skip};
    x = run(merge_[s], concat_channels<T>(parts), training);
    if (s >= 1) outputs.push_back(sigmoid(heads_[s - 1](x)));
  }
  x = run(final_up_, upsample_nearest(x, volume.dim(2), volume.dim(3)), training);
  x = run(refine_, x, training);
  outputs.push_back(sigmoid(heads_[3](x)));
  return outputs;
}

template class MaskNet<float>;
template class MaskNet<double>;

}  // namespace mmvs::nn
