#include "mmvs/neural/dispnet.hpp"

#include <stdexcept>
#include <string>

#include "mmvs/neural/ops.hpp"

namespace mmvs::nn {

namespace {

constexpr double kHeadBias = 0.25;

}  // namespace

template <typename T>
DispNet<T>::DispNet(const NetworkConfig& config) : config_(config), rng_(config.seed ^ 0xd15b7e7ULL) {
  config_.check();
  const auto b = config_.base_channels;
  const std::array<std::size_t, 6> width{b, 2 * b, 4 * b, 8 * b, 8 * b, 8 * b};
  const std::array<std::size_t, 6> kernel{7, 5, 3, 3, 3, 3};
  auto conv_bn = [&](const std::string& name, std::size_t in, std::size_t out, std::size_t k, std::size_t stride) {
    ConvBn block;
    block.conv = Conv2d<T>(store_, "dispnet." + name + ".conv", {LayerKind::kConv, k, stride, in, out}, rng_, false);
    block.bn = BatchNorm2d<T>(store_, "dispnet." + name + ".bn", out);
    return block;
  };
  std::size_t in = config_.dispnet_input_channels();
  for (std::size_t i = 0; i < 6; ++i) {
    encoder_[i] = conv_bn("enc" + std::to_string(i + 1), in, width[i], kernel[i], 2);
    in = width[i];
  }
  const std::array<std::size_t, 6> dec_width{8 * b, 8 * b, 4 * b, 2 * b, b, b};
  std::size_t prev = width[5];
  for (std::size_t s = 0; s < 6; ++s) {
    const auto skip = s < 5 ? width[4 - s] : config_.dispnet_input_channels();
    const auto tag = std::to_string(s + 1);
    up_[s] = Conv2d<T>(store_, "dispnet.up" + tag, {LayerKind::kDeconv, 3, 1, prev, dec_width[s]}, rng_, true);
    merge_[s] = conv_bn("merge" + tag, dec_width[s] + skip, dec_width[s], 3, 1);
    heads_[s] = Conv2d<T>(store_, "dispnet.head" + tag, {LayerKind::kConv, 3, 1, dec_width[s], 1}, rng_, true,
                          WeightInit::kSmallUniform, kHeadBias);
    prev = dec_width[s];
  }
}

template <typename T>
std::vector<Tensor<T>> DispNet<T>::forward(const Tensor<T>& input, bool training) {
  if (input.rank() != 4 || input.dim(1) != config_.dispnet_input_channels()) {
    throw std::invalid_argument("DispNet expects " + std::to_string(config_.dispnet_input_channels()) +
                                " input channels for D=" + std::to_string(config_.planes) + ", got " +
                                (input.defined() ? shape_string(input.shape()) : std::string("nothing")));
  }
  const double slope = config_.leaky_slope;
  std::array<Tensor<T>, 6> enc;
  Tensor<T> x = input;
  for (std::size_t i = 0; i < 6; ++i) {
    x = leaky_relu(encoder_[i].bn(encoder_[i].conv(x), training), slope);
    enc[i] = x;
  }
  std::vector<Tensor<T>> outputs;
  for (std::size_t s = 0; s < 6; ++s) {
    const Tensor<T>& skip = s < 5 ? enc[4 - s] : input;
    x = leaky_relu(up_[s](upsample_nearest(x, skip.dim(2), skip.dim(3))), slope);
    const std::array<Tensor<T>, 2> parts{x, skip};
    x = leaky_relu(merge_[s].bn(merge_[s].conv(concat_channels<T>(parts)), training), slope);
    outputs.push_back(relu(heads_[s](x)));
  }
  return outputs;
}

template class DispNet<float>;
template class DispNet<double>;

}  // namespace mmvs::nn
