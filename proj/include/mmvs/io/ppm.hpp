#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace mmvs::io {

/// 8-bit interleaved RGB raster, row-major.
struct Rgb8Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;
};

/// Binary PPM (P6, maxval 255).
void write_ppm(const std::filesystem::path& path, const Rgb8Image& image);
Rgb8Image read_ppm(const std::filesystem::path& path);

}  // namespace mmvs::io
