#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mmvs::geometry {

/// Planar (channel, row, column) float image with values in [0, 1].
///
/// `validity` is either empty (every pixel valid) or holds one flag per
/// pixel, row-major.
struct ImageBuffer {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;
  std::vector<std::uint8_t> validity;

  static ImageBuffer zeros(std::size_t channels, std::size_t height, std::size_t width);

  std::size_t pixel_count() const { return height * width; }
  std::size_t index(std::size_t c, std::size_t y, std::size_t x) const {
    return (c * height + y) * width + x;
  }
  float at(std::size_t c, std::size_t y, std::size_t x) const { return data[index(c, y, x)]; }
  float& at(std::size_t c, std::size_t y, std::size_t x) { return data[index(c, y, x)]; }
  bool valid(std::size_t y, std::size_t x) const {
    return validity.empty() || validity[y * width + x] != 0;
  }
  std::size_t valid_count() const;

  /// Throws when the data length disagrees with the shape or a value is not finite.
  void check() const;
};

}  // namespace mmvs::geometry
