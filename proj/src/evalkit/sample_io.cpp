#include "mmvs/evalkit/sample_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mmvs::evalkit {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  io::write_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = io::read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

std::vector<double> parse_numbers(const std::string& row) {
  std::istringstream in(row);
  std::vector<double> v;
  std::string tok;
  while (in >> tok) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::logic_error&) {
      throw std::runtime_error("not a number: '" + tok + "'");
    }
  }
  return v;
}

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

std::string neighbour_file_name(std::size_t k) { return "neighbour_" + std::to_string(k) + ".ppm"; }

io::Rgb8Image to_rgb8(const geometry::ImageBuffer& image) {
  if (image.channels != 3) throw std::invalid_argument("PPM export needs an RGB image");
  io::Rgb8Image out;
  out.width = image.width;
  out.height = image.height;
  out.data.resize(image.pixel_count() * 3);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const float v = std::clamp(image.at(c, y, x), 0.0f, 1.0f);
        out.data[(y * image.width + x) * 3 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
    }
  }
  return out;
}

geometry::ImageBuffer from_rgb8(const io::Rgb8Image& image) {
  auto out = geometry::ImageBuffer::zeros(3, image.height, image.width);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        out.at(c, y, x) = static_cast<float>(image.data[(y * image.width + x) * 3 + c]) / 255.0f;
      }
    }
  }
  return out;
}

io::TensorFile depth_to_tensor(const masks::DepthMap& depth) {
  io::TensorFile t;
  t.axes = {static_cast<std::uint32_t>(depth.height), static_cast<std::uint32_t>(depth.width)};
  t.payload.resize(depth.pixel_count());
  for (std::size_t i = 0; i < t.payload.size(); ++i) {
    t.payload[i] = depth.valid(i) ? static_cast<float>(depth.values[i])
                                  : std::numeric_limits<float>::quiet_NaN();
  }
  return t;
}

masks::DepthMap depth_from_tensor(const io::TensorFile& tensor) {
  if (tensor.axes.size() != 2) throw std::runtime_error("depth tensor must have axes [H, W]");
  masks::DepthMap d;
  d.height = tensor.axes[0];
  d.width = tensor.axes[1];
  d.values.resize(d.pixel_count());
  d.validity.resize(d.pixel_count());
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    const float v = tensor.payload[i];
    const bool ok = std::isfinite(v) && v > 0.0f;
    d.values[i] = ok ? static_cast<double>(v) : 0.0;
    d.validity[i] = ok ? 1 : 0;
  }
  return d;
}

std::string format_pose(const geometry::RelativePose& pose) {
  std::string row;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      append_number(row, pose.rotation(r, c));
      row += ' ';
    }
    append_number(row, pose.translation(r));
    if (r < 2) row += ' ';
  }
  return row;
}

geometry::RelativePose parse_pose(const std::string& row) {
  const auto v = parse_numbers(row);
  if (v.size() != 12) throw std::runtime_error("pose row needs 12 numbers, got " + std::to_string(v.size()));
  geometry::RelativePose p;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) p.rotation(r, c) = v[r * 4 + c];
    p.translation(r) = v[r * 4 + 3];
  }
  p.check(1e-6);
  return p;
}

std::vector<geometry::RelativePose> read_poses(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<geometry::RelativePose> poses;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    poses.push_back(parse_pose(line));
  }
  return poses;
}

void write_sample(const std::filesystem::path& dir, const Sample& sample) {
  sample.check();
  std::filesystem::create_directories(dir);
  io::write_ppm(dir / kReferenceFile, to_rgb8(sample.reference));
  std::string poses;
  for (std::size_t k = 0; k < sample.neighbours.size(); ++k) {
    io::write_ppm(dir / neighbour_file_name(k), to_rgb8(sample.neighbours[k].image));
    poses += format_pose(sample.neighbours[k].pose) + "\n";
  }
  write_text(dir / kPosesFile, poses);
  std::string intr;
  for (double v : {sample.camera.fx, sample.camera.fy, sample.camera.cx, sample.camera.cy}) {
    if (!intr.empty()) intr += ' ';
    append_number(intr, v);
  }
  write_text(dir / kIntrinsicsFile, intr + "\n");
  io::write_tensor_file(dir / kDepthFile, depth_to_tensor(sample.truth));
}

Sample read_sample(const std::filesystem::path& dir) {
  Sample s;
  s.id = dir.filename().string();
  s.reference = from_rgb8(io::read_ppm(dir / kReferenceFile));
  const auto intr = parse_numbers(read_text(dir / kIntrinsicsFile));
  if (intr.size() != 4) throw std::runtime_error(dir.string() + ": intrinsics need 4 numbers");
  s.camera.fx = intr[0];
  s.camera.fy = intr[1];
  s.camera.cx = intr[2];
  s.camera.cy = intr[3];
  s.camera.width = s.reference.width;
  s.camera.height = s.reference.height;
  const auto poses = read_poses(dir / kPosesFile);
  for (std::size_t k = 0; std::filesystem::exists(dir / neighbour_file_name(k)); ++k) {
    if (k >= poses.size()) {
      throw std::runtime_error(dir.string() + ": missing pose for neighbour " + std::to_string(k));
    }
    s.neighbours.push_back({from_rgb8(io::read_ppm(dir / neighbour_file_name(k))), poses[k]});
  }
  if (std::filesystem::exists(dir / kDepthFile)) {
    s.truth = depth_from_tensor(io::read_tensor_file(dir / kDepthFile));
  } else {
    s.truth.height = s.camera.height;
    s.truth.width = s.camera.width;
    s.truth.values.assign(s.truth.pixel_count(), 0.0);
    s.truth.validity.assign(s.truth.pixel_count(), 0);
  }
  s.check();
  return s;
}

void write_manifest(const std::filesystem::path& root, const std::vector<ManifestEntry>& entries) {
  std::string text;
  for (const auto& e : entries) text += e.id + "\t" + std::to_string(e.seed) + "\n";
  write_text(root / kManifestFile, text);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& root) {
  std::istringstream in(read_text(root / kManifestFile));
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("malformed manifest row: " + line);
    ManifestEntry e;
    e.id = line.substr(0, tab);
    try {
      e.seed = std::stoull(line.substr(tab + 1));
    } catch (const std::logic_error&) {
      throw std::runtime_error("malformed manifest seed: " + line);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<Sample> read_dataset(const std::filesystem::path& root) {
  std::vector<Sample> samples;
  for (const auto& e : read_manifest(root)) {
    auto s = read_sample(root / e.id);
    s.seed = e.seed;
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw std::runtime_error(root.string() + ": dataset is empty");
  return samples;
}

}  // namespace mmvs::evalkit
