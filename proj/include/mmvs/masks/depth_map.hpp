#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mmvs::masks {

/// Row-major metric depth with a per-pixel validity flag. Ground truth may
/// have holes; valid entries are finite and positive.
struct DepthMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> validity;

  static DepthMap filled(std::size_t height, std::size_t width, double depth);

  std::size_t pixel_count() const { return height * width; }
  bool valid(std::size_t i) const { return validity[i] != 0; }
  std::size_t valid_count() const;
  void check() const;
};

}  // namespace mmvs::masks
