#include "mmvs/sampling/persistence.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mmvs/io/binary.hpp"
#include "mmvs/io/tensor_file.hpp"

namespace mmvs::sampling {

namespace {

constexpr std::string_view kHistogramMagic = "DHST";
constexpr std::uint8_t kHistogramVersion = 1;

}  // namespace

std::vector<std::uint8_t> encode_histogram(const DepthHistogram& h) {
  h.check();
  io::ByteWriter w;
  w.put_raw(kHistogramMagic);
  w.put_u8(kHistogramVersion);
  w.put_u32(static_cast<std::uint32_t>(h.bins()));
  w.put_f64(h.d_max());
  for (auto c : h.counts) w.put_u64(c);
  return w.release();
}

DepthHistogram decode_histogram(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (r.get_raw(kHistogramMagic.size()) != kHistogramMagic) {
    throw std::runtime_error("not a depth histogram (bad magic)");
  }
  if (r.get_u8() != kHistogramVersion) throw std::runtime_error("unsupported histogram version");
  const auto bins = r.get_u32();
  const double d_max = r.get_f64();
  if (bins < 1 || !(d_max > 0.0)) throw std::runtime_error("malformed histogram header");
  if (r.remaining() != static_cast<std::size_t>(bins) * 8) {
    throw std::runtime_error("histogram payload length does not match its bin count");
  }
  DepthHistogram h;
  h.counts.resize(bins);
  for (auto& c : h.counts) {
    c = r.get_u64();
    h.total += c;
  }
  h.bin_edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    h.bin_edges[k] = d_max * static_cast<double>(k) / static_cast<double>(bins);
  }
  h.bin_edges.back() = d_max;
  return h;
}

void write_histogram(const std::filesystem::path& path, const DepthHistogram& h) {
  io::write_bytes(path, encode_histogram(h));
}

DepthHistogram read_histogram(const std::filesystem::path& path) {
  return decode_histogram(io::read_bytes(path));
}

std::string format_planes(const PlaneSet& planes) {
  planes.check();
  std::string out;
  char buf[64];
  for (double d : planes.depths) {
    std::snprintf(buf, sizeof buf, "%.17g\n", d);
    out += buf;
  }
  return out;
}

PlaneSet parse_planes(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> depths;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      depths.push_back(std::stod(line, &used));
      if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::logic_error&) {
      throw std::runtime_error("plane file line " + std::to_string(lineno) + ": not a number");
    }
  }
  return make_plane_set(std::move(depths));
}

void write_planes(const std::filesystem::path& path, const PlaneSet& planes) {
  const auto text = format_planes(planes);
  io::write_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

PlaneSet read_planes(const std::filesystem::path& path) {
  const auto bytes = io::read_bytes(path);
  return parse_planes(std::string(bytes.begin(), bytes.end()));
}

}  // namespace mmvs::sampling
