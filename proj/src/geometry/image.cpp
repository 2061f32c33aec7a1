#include "mmvs/geometry/image.hpp"

#include <cmath>
#include <stdexcept>

namespace mmvs::geometry {

ImageBuffer ImageBuffer::zeros(std::size_t channels, std::size_t height, std::size_t width) {
  ImageBuffer img;
  img.channels = channels;
  img.height = height;
  img.width = width;
  img.data.assign(channels * height * width, 0.0f);
  return img;
}

std::size_t ImageBuffer::valid_count() const {
  if (validity.empty()) return pixel_count();
  std::size_t n = 0;
  for (auto v : validity) n += v != 0;
  return n;
}

void ImageBuffer::check() const {
  if (data.size() != channels * height * width) {
    throw std::invalid_argument("image data length does not match channels x height x width");
  }
  if (!validity.empty() && validity.size() != height * width) {
    throw std::invalid_argument("image validity mask has the wrong size");
  }
  for (float v : data) {
    if (!std::isfinite(v)) throw std::invalid_argument("image contains non-finite values");
  }
}

}  // namespace mmvs::geometry
