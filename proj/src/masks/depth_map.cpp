#include "mmvs/masks/depth_map.hpp"

#include <cmath>
#include <stdexcept>

namespace mmvs::masks {

DepthMap DepthMap::filled(std::size_t height, std::size_t width, double depth) {
  DepthMap d;
  d.height = height;
  d.width = width;
  d.values.assign(height * width, depth);
  d.validity.assign(height * width, 1);
  return d;
}

std::size_t DepthMap::valid_count() const {
  std::size_t n = 0;
  for (auto v : validity) n += v != 0;
  return n;
}

void DepthMap::check() const {
  if (values.size() != height * width || validity.size() != height * width) {
    throw std::invalid_argument("depth map storage does not match height x width");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (validity[i] && !(std::isfinite(values[i]) && values[i] > 0.0)) {
      throw std::invalid_argument("valid depth entries must be finite and positive");
    }
  }
}

}  // namespace mmvs::masks
