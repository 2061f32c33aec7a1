#include "mmvs/cli/config.hpp"

#include <cstdlib>
#include <stdexcept>

namespace mmvs::cli {

nn::AdamConfig RunConfig::adam() const {
  nn::AdamConfig a;
  a.lr = learning_rate();
  a.beta1 = beta1;
  a.beta2 = beta2;
  a.eps = adam_eps;
  a.check();
  return a;
}

nn::NetworkConfig RunConfig::network(std::size_t plane_count) const {
  nn::NetworkConfig n;
  n.planes = plane_count;
  n.base_channels = base_channels;
  n.input_height = height;
  n.input_width = width;
  n.seed = seed;
  n.check();
  return n;
}

nlohmann::json RunConfig::to_json() const {
  const auto net = nn::NetworkConfig{};
  return {
      {"seed", seed},
      {"data", {{"scenes", scenes}, {"neighbours", neighbours}, {"depth_min", depth_min}, {"depth_max", depth_max},
                {"width", width}, {"height", height}}},
      {"sampling", {{"scheme", scheme}, {"planes", planes}, {"theta_min", theta_min}, {"theta_max", theta_max},
                    {"d_min", d_min}, {"d_max", d_max}, {"bins", bins}, {"histogram_d_max", histogram_d_max}}},
      {"network", {{"base_channels", base_channels}, {"mask_scales", net.mask_scales},
                   {"disp_scales", net.disp_scales}, {"loss_weights", net.loss_weights},
                   {"leaky_slope", net.leaky_slope}}},
      {"optimizer", {{"stage", stage}, {"lr", learning_rate()}, {"masknet_lr", masknet_lr},
                     {"dispnet_lr", dispnet_lr}, {"beta1", beta1}, {"beta2", beta2}, {"eps", adam_eps},
                     {"batch_size", batch_size}, {"iterations", iterations},
                     {"checkpoint_every", checkpoint_every}, {"augment", augment}}},
      {"predict", {{"inverse_depth_floor", inverse_depth_floor}}},
  };
}

void apply_environment(RunConfig& config) {
  const char* value = std::getenv("MMVS_SEED");
  if (value == nullptr || *value == '\0') return;
  const std::string text(value);
  if (text.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("MMVS_SEED must be an unsigned integer, got '" + text + "'");
  }
  config.seed = std::stoull(text);
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("expected a range a:b, got '" + text + "'");
  std::size_t used_a = 0, used_b = 0;
  const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
  double lo = 0.0, hi = 0.0;
  try {
    lo = std::stod(a, &used_a);
    hi = std::stod(b, &used_b);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a range a:b, got '" + text + "'");
  }
  if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument("expected a range a:b, got '" + text + "'");
  if (!(lo > 0.0 && lo < hi)) throw std::invalid_argument("range must satisfy 0 < a < b, got '" + text + "'");
  return {lo, hi};
}

}  // namespace mmvs::cli
