#include "mmvs/io/tensor_file.hpp"

#include <fstream>
#include <iterator>
#include <stdexcept>

#include "mmvs/io/binary.hpp"

namespace mmvs::io {

namespace {

constexpr std::string_view kMagic = "MMVS";

}  // namespace

std::size_t TensorFile::element_count() const {
  std::size_t n = 1;
  for (auto a : axes) n *= a;
  return n;
}

std::vector<std::uint8_t> encode_tensor_file(const TensorFile& tensor) {
  if (tensor.axes.size() > 255) {
    throw std::invalid_argument("tensor file supports at most 255 axes");
  }
  if (tensor.payload.size() != tensor.element_count()) {
    throw std::invalid_argument("tensor payload length does not match its axes");
  }
  ByteWriter w;
  w.put_raw(kMagic);
  w.put_u8(kTensorFileVersion);
  w.put_u8(static_cast<std::uint8_t>(tensor.axes.size()));
  for (auto a : tensor.axes) w.put_u32(a);
  for (float v : tensor.payload) w.put_f32(v);
  return w.release();
}

TensorFile decode_tensor_file(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.get_raw(kMagic.size()) != kMagic) {
    throw std::runtime_error("not a tensor file (bad magic)");
  }
  const auto version = r.get_u8();
  if (version != kTensorFileVersion) {
    throw std::runtime_error("unsupported tensor file version " + std::to_string(version));
  }
  TensorFile t;
  const auto rank = r.get_u8();
  t.axes.resize(rank);
  for (auto& a : t.axes) a = r.get_u32();
  const auto n = t.element_count();
  if (r.remaining() != n * 4) {
    throw std::runtime_error("tensor file payload length does not match its axes");
  }
  t.payload.resize(n);
  for (auto& v : t.payload) v = r.get_f32();
  return t;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_tensor_file(const std::filesystem::path& path, const TensorFile& tensor) {
  write_bytes(path, encode_tensor_file(tensor));
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
  return decode_tensor_file(read_bytes(path));
}

}  // namespace mmvs::io
