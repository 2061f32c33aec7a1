#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "mmvs/neural/adam.hpp"
#include "mmvs/neural/network_config.hpp"

namespace mmvs::cli {

/// Every command parameter with its default.
struct RunConfig {
  std::uint64_t seed = 1;

  // gen-data
  std::size_t scenes = 20;
  std::size_t neighbours = 2;
  double depth_min = 1.0;
  double depth_max = 10.0;
  std::size_t width = 64;
  std::size_t height = 48;

  // sample-planes
  std::string scheme = "hist";
  std::size_t planes = 16;
  double theta_min = 0.1;
  double theta_max = 1.0;
  double d_min = 0.5;
  double d_max = 50.0;
  std::size_t bins = 200;
  double histogram_d_max = 0.0;  // 0: the largest depth in the dataset

  // train
  std::string stage = "masknet";
  std::size_t base_channels = 8;
  double masknet_lr = 2e-4;
  double dispnet_lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 4;
  std::uint64_t iterations = 500000;
  std::uint64_t checkpoint_every = 1000;
  bool augment = true;  // flips and colour permutations during training

  // predict
  double inverse_depth_floor = 1e-6;

  /// Learning rate of the configured stage.
  double learning_rate() const { return stage == "dispnet" ? dispnet_lr : masknet_lr; }
  nn::AdamConfig adam() const;
  nn::NetworkConfig network(std::size_t plane_count) const;
  nlohmann::json to_json() const;
};

/// Applies MMVS_SEED from the environment, if set, over `config.seed`.
/// Throws when the variable is not an unsigned integer.
void apply_environment(RunConfig& config);

/// Parses "a:b" into two numbers.
std::pair<double, double> parse_range(const std::string& text);

}  // namespace mmvs::cli
