#include "mmvs/neural/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace mmvs::nn {

void AdamConfig::check() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("adam: learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("adam: betas must lie in (0, 1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("adam: eps must be positive");
}

template <typename T>
AdamState<T> make_adam_state(const AdamConfig& config, std::span<const NamedTensor<T>> params) {
  config.check();
  AdamState<T> state;
  state.config = config;
  for (const auto& p : params) {
    state.first_moment.emplace_back(p.tensor.numel(), T(0));
    state.second_moment.emplace_back(p.tensor.numel(), T(0));
  }
  return state;
}

template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v, std::uint64_t step,
                 const AdamConfig& config) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw std::invalid_argument("adam: parameter, gradient and moment sizes differ");
  }
  if (step == 0) throw std::invalid_argument("adam: step is 1-based");
  const double b1 = config.beta1, b2 = config.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    const double mi = b1 * m[i] + (1.0 - b1) * g;
    const double vi = b2 * v[i] + (1.0 - b2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double update = config.lr * (mi / c1) / (std::sqrt(vi / c2) + config.eps);
    param[i] = static_cast<T>(param[i] - update);
  }
}

template <typename T>
void adam_step(std::span<const NamedTensor<T>> params, AdamState<T>& state) {
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw std::invalid_argument("adam: state does not match the parameter list");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& t = params[k].tensor;
    if (state.first_moment[k].size() != t.numel() || state.second_moment[k].size() != t.numel()) {
      throw std::invalid_argument("adam: moment shape mismatch for " + params[k].name);
    }
    if (!t.has_grad()) continue;
    for (T g : t.grad()) {
      if (!std::isfinite(static_cast<double>(g))) {
        throw std::runtime_error("adam: non-finite gradient in " + params[k].name);
      }
    }
  }
  ++state.step;
  std::vector<T> zeros;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto t = params[k].tensor;
    std::span<const T> g;
    if (t.has_grad()) {
      g = t.grad();
    } else {
      zeros.assign(t.numel(), T(0));
      g = zeros;
    }
    adam_update<T>(t.mutable_values(), g, state.first_moment[k], state.second_moment[k], state.step, state.config);
  }
}

#define MMVS_INSTANTIATE_ADAM(T)                                                                                  \
  template AdamState<T> make_adam_state(const AdamConfig&, std::span<const NamedTensor<T>>);                      \
  template void adam_update(std::span<T>, std::span<const T>, std::span<T>, std::span<T>, std::uint64_t,          \
                            const AdamConfig&);                                                                    \
  template void adam_step(std::span<const NamedTensor<T>>, AdamState<T>&);

MMVS_INSTANTIATE_ADAM(float)
MMVS_INSTANTIATE_ADAM(double)

#undef MMVS_INSTANTIATE_ADAM

}  // namespace mmvs::nn
