#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mmvs/neural/tensor.hpp"

namespace mmvs::nn {

// Differentiable operations. Image tensors are NCHW. Each op records a
// backward closure when grad mode is on and any input requires a gradient.

/// 2-D cross-correlation. weight is [O, C, k, k]; bias is [O] or undefined.
/// Output size is (H + 2 padding - k) / stride + 1 per axis.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 std::size_t stride, std::size_t padding);

/// Nearest-neighbour resize; source index = floor(dst * in / out).
template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& x, std::size_t out_height, std::size_t out_width);

/// Non-overlapping k x k mean pooling; H and W must be multiples of k.
template <typename T>
Tensor<T> avg_pool2d(const Tensor<T>& x, std::size_t kernel);

/// Per-channel batch normalisation. In training mode the batch statistics
/// normalise and the running buffers (no gradient) are updated in place with
/// the unbiased variance; otherwise the running statistics are used.
template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     Tensor<T>& running_mean, Tensor<T>& running_var, bool training,
                     double momentum = 0.1, double eps = 1e-5);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);
template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, double slope);
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);

/// Concatenation along axis 1 of tensors that agree on every other axis.
template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>> parts);

/// Averages consecutive runs of the batch axis: output row g is the mean of
/// the next group_sizes[g] input rows.
template <typename T>
Tensor<T> group_mean(const Tensor<T>& x, std::span<const std::size_t> group_sizes);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> scale(const Tensor<T>& a, double factor);
template <typename T>
Tensor<T> sum(const Tensor<T>& a);
template <typename T>
Tensor<T> mean(const Tensor<T>& a);

/// Binary cross-entropy averaged over valid cells. `pred` and `target` are
/// [N, D, H, W]; `pixel_valid` has N*H*W flags shared by every plane.
/// Predictions are clamped to [1e-7, 1 - 1e-7]. Throws if no cell is valid.
template <typename T>
Tensor<T> bce_loss(const Tensor<T>& pred, std::span<const float> target,
                   std::span<const std::uint8_t> pixel_valid);

/// Mean absolute error over valid pixels of an [N, 1, H, W] prediction.
/// Throws if no pixel is valid.
template <typename T>
Tensor<T> l1_loss(const Tensor<T>& pred, std::span<const float> target,
                  std::span<const std::uint8_t> pixel_valid);

}  // namespace mmvs::nn
