#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mmvs/neural/layers.hpp"

namespace mmvs::nn {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void check() const;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
};

/// Zeroed moments shaped like `params`.
template <typename T>
AdamState<T> make_adam_state(const AdamConfig& config, std::span<const NamedTensor<T>> params);

/// One bias-corrected update of a single tensor at 1-based step `step`.
template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v, std::uint64_t step,
                 const AdamConfig& config);

/// Applies one update to every parameter from its accumulated gradient (a
/// missing gradient counts as zero) and increments the step. Throws before
/// touching anything if a gradient is not finite.
template <typename T>
void adam_step(std::span<const NamedTensor<T>> params, AdamState<T>& state);

}  // namespace mmvs::nn
