#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mmvs/neural/tensor.hpp"

namespace mmvs::nn {

enum class LayerKind { kConv, kDeconv, kBatchNorm, kRelu, kLeakyRelu, kSigmoid, kAvgPool, kConcatSkip };

std::string to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::kConv;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;

  /// Convolution kernels must be odd and strides 1 or 2.
  void check() const;
};

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

/// Owns the trainable parameters and the non-trainable buffers of a model
/// under unique names. Handles returned by add_* alias the stored tensors.
template <typename T>
class ParameterStore {
 public:
  Tensor<T> add_parameter(const std::string& name, Shape shape, std::vector<T> values);
  Tensor<T> add_buffer(const std::string& name, Shape shape, std::vector<T> values);

  std::span<const NamedTensor<T>> parameters() const { return parameters_; }
  std::span<const NamedTensor<T>> buffers() const { return buffers_; }
  /// Total number of trainable scalars.
  std::size_t parameter_count() const;
  void zero_grad();

 private:
  void claim(const std::string& name);

  std::vector<NamedTensor<T>> parameters_;
  std::vector<NamedTensor<T>> buffers_;
  std::set<std::string> names_;
};

enum class WeightInit { kFanInUniform, kZero, kSmallUniform };

/// Square-kernel convolution with padding kernel / 2.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParameterStore<T>& store, const std::string& name, const LayerSpec& spec, std::mt19937_64& rng,
         bool with_bias, WeightInit init = WeightInit::kFanInUniform, double bias_value = 0.0);

  Tensor<T> operator()(const Tensor<T>& x) const;
  const LayerSpec& spec() const { return spec_; }

 private:
  LayerSpec spec_;
  Tensor<T> weight_;
  Tensor<T> bias_;
};

template <typename T>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  BatchNorm2d(ParameterStore<T>& store, const std::string& name, std::size_t channels);

  Tensor<T> operator()(const Tensor<T>& x, bool training);

 private:
  Tensor<T> gamma_;
  Tensor<T> beta_;
  Tensor<T> running_mean_;
  Tensor<T> running_var_;
};

}  // namespace mmvs::nn
