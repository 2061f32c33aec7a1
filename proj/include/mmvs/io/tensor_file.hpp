#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mmvs::io {

/// Dense float32 tensor as stored on disk.
///
/// Layout: the 4 magic bytes "MMVS", one version byte, one axis-count byte,
/// each axis as an unsigned 32-bit little-endian integer, then the row-major
/// payload as little-endian IEEE-754 float32. NaN marks missing depth.
struct TensorFile {
  std::vector<std::uint32_t> axes;
  std::vector<float> payload;

  std::size_t element_count() const;
};

inline constexpr std::uint8_t kTensorFileVersion = 1;

std::vector<std::uint8_t> encode_tensor_file(const TensorFile& tensor);
TensorFile decode_tensor_file(std::span<const std::uint8_t> bytes);

void write_tensor_file(const std::filesystem::path& path, const TensorFile& tensor);
TensorFile read_tensor_file(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace mmvs::io
