#include "mmvs/neural/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "mmvs/neural/ops.hpp"

namespace mmvs::nn {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kDeconv: return "deconv";
    case LayerKind::kBatchNorm: return "batchnorm";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kLeakyRelu: return "leaky_relu";
    case LayerKind::kSigmoid: return "sigmoid";
    case LayerKind::kAvgPool: return "avgpool";
    case LayerKind::kConcatSkip: return "concat_skip";
  }
  return "unknown";
}

void LayerSpec::check() const {
  if (kind == LayerKind::kConv || kind == LayerKind::kDeconv) {
    if (kernel % 2 == 0) throw std::invalid_argument(to_string(kind) + " kernel must be odd");
    if (in_channels == 0 || out_channels == 0) {
      throw std::invalid_argument(to_string(kind) + " needs non-zero channel counts");
    }
  }
  if (stride != 1 && stride != 2) throw std::invalid_argument("stride must be 1 or 2");
}

template <typename T>
void ParameterStore<T>::claim(const std::string& name) {
  if (!names_.insert(name).second) throw std::invalid_argument("duplicate tensor name: " + name);
}

template <typename T>
Tensor<T> ParameterStore<T>::add_parameter(const std::string& name, Shape shape, std::vector<T> values) {
  claim(name);
  Tensor<T> t(std::move(shape), std::move(values), true);
  parameters_.push_back({name, t});
  return t;
}

template <typename T>
Tensor<T> ParameterStore<T>::add_buffer(const std::string& name, Shape shape, std::vector<T> values) {
  claim(name);
  Tensor<T> t(std::move(shape), std::move(values), false);
  buffers_.push_back({name, t});
  return t;
}

template <typename T>
std::size_t ParameterStore<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters_) n += p.tensor.numel();
  return n;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : parameters_) {
    auto t = p.tensor;
    t.zero_grad();
  }
}

template <typename T>
Conv2d<T>::Conv2d(ParameterStore<T>& store, const std::string& name, const LayerSpec& spec,
                  std::mt19937_64& rng, bool with_bias, WeightInit init, double bias_value)
    : spec_(spec) {
  spec_.check();
  const auto k = spec.kernel;
  const auto fan_in = spec.in_channels * k * k;
  std::vector<T> w(spec.out_channels * fan_in, T(0));
  double bound = 0.0;
  if (init == WeightInit::kFanInUniform) bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  if (init == WeightInit::kSmallUniform) bound = 0.1 / std::sqrt(static_cast<double>(fan_in));
  if (bound > 0.0) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : w) v = static_cast<T>(dist(rng));
  }
  weight_ = store.add_parameter(name + ".weight", {spec.out_channels, spec.in_channels, k, k}, std::move(w));
  if (with_bias) {
    bias_ = store.add_parameter(name + ".bias", {spec.out_channels},
                                std::vector<T>(spec.out_channels, static_cast<T>(bias_value)));
  }
}

template <typename T>
Tensor<T> Conv2d<T>::operator()(const Tensor<T>& x) const {
  if (x.rank() != 4 || x.dim(1) != spec_.in_channels) {
    throw std::invalid_argument("conv expects " + std::to_string(spec_.in_channels) + " input channels, got " +
                                shape_string(x.shape()));
  }
  return conv2d(x, weight_, bias_, spec_.stride, spec_.kernel / 2);
}

template <typename T>
BatchNorm2d<T>::BatchNorm2d(ParameterStore<T>& store, const std::string& name, std::size_t channels) {
  gamma_ = store.add_parameter(name + ".gamma", {channels}, std::vector<T>(channels, T(1)));
  beta_ = store.add_parameter(name + ".beta", {channels}, std::vector<T>(channels, T(0)));
  running_mean_ = store.add_buffer(name + ".running_mean", {channels}, std::vector<T>(channels, T(0)));
  running_var_ = store.add_buffer(name + ".running_var", {channels}, std::vector<T>(channels, T(1)));
}

template <typename T>
Tensor<T> BatchNorm2d<T>::operator()(const Tensor<T>& x, bool training) {
  return batch_norm(x, gamma_, beta_, running_mean_, running_var_, training);
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template class Conv2d<float>;
template class Conv2d<double>;
template class BatchNorm2d<float>;
template class BatchNorm2d<double>;

}  // namespace mmvs::nn
