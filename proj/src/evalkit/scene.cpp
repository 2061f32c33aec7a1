#include "mmvs/evalkit/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mmvs::evalkit {

namespace {

std::uint64_t mix(std::uint64_t x) {
  // splitmix64 finaliser
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

std::array<float, 3> Texture::sample(double x, double y) const {
  std::array<float, 3> c = base_color;
  if (!textureless) {
    for (const auto& w : waves) {
      const double s = std::sin(2.0 * std::numbers::pi * (w.freq_x * x + w.freq_y * y) + w.phase);
      for (int k = 0; k < 3; ++k) c[k] += static_cast<float>(w.amplitude[k] * s);
    }
    if (block_size > 0.0) {
      const auto bx = static_cast<std::int64_t>(std::floor(x / block_size));
      const auto by = static_cast<std::int64_t>(std::floor(y / block_size));
      auto h = mix(block_seed ^ mix(static_cast<std::uint64_t>(bx) * 0x100000001b3ULL ^
                                    static_cast<std::uint64_t>(by)));
      for (int k = 0; k < 3; ++k) {
        h = mix(h);
        const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        c[k] += static_cast<float>(block_amplitude * (2.0 * u - 1.0));
      }
    }
  }
  for (auto& v : c) v = std::clamp(v, 0.0f, 1.0f);
  return c;
}

std::array<double, 2> Layer::depth_bounds() const {
  double lo = surface_depth(x_min, y_min);
  double hi = lo;
  for (double x : {x_min, x_max}) {
    for (double y : {y_min, y_max}) {
      lo = std::min(lo, surface_depth(x, y));
      hi = std::max(hi, surface_depth(x, y));
    }
  }
  return {lo, hi};
}

void SceneSpec::check() const {
  if (!(background_depth > 0.0)) throw std::invalid_argument("background depth must be positive");
  double prev = 0.0;
  for (const auto& l : layers) {
    if (!(l.depth > 0.0) || !(l.depth_bounds()[0] > 0.0)) {
      throw std::invalid_argument("layer depths must be positive");
    }
    if (!(l.x_max > l.x_min) || !(l.y_max > l.y_min)) {
      throw std::invalid_argument("layer extent is empty");
    }
    if (l.depth < prev) throw std::invalid_argument("layers must be sorted near to far");
    prev = l.depth;
  }
}

SceneOptions SceneOptions::for_depth_range(double d_min, double d_max) {
  if (!(d_min > 0.0) || !(d_max > d_min)) throw std::invalid_argument("invalid depth range");
  SceneOptions o;
  const double split = d_min + 0.6 * (d_max - d_min);
  o.layer_min_depth = d_min;
  o.layer_max_depth = split;
  o.background_min_depth = split;
  o.background_max_depth = d_max;
  return o;
}

Texture random_texture(std::uint64_t seed, double depth, const geometry::CameraModel& camera,
                       const SceneOptions& options) {
  std::mt19937_64 rng(mix(seed));
  Texture t;
  for (auto& c : t.base_color) c = static_cast<float>(uniform(rng, 0.3, 0.7));
  // World frequency whose image wavelength at `depth` falls in the requested band.
  const double focal = 0.5 * (camera.fx + camera.fy);
  const int n_waves = 3;
  for (int i = 0; i < n_waves; ++i) {
    Wave w;
    const double wavelength_px = uniform(rng, options.min_wavelength_px, options.max_wavelength_px);
    const double freq = focal / (wavelength_px * depth);
    const double angle = uniform(rng, 0.0, std::numbers::pi);
    w.freq_x = freq * std::cos(angle);
    w.freq_y = freq * std::sin(angle);
    w.phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    for (auto& a : w.amplitude) a = static_cast<float>(uniform(rng, 0.04, 0.12));
    t.waves.push_back(w);
  }
  t.block_size = uniform(rng, 24.0, 40.0) * depth / focal;
  t.block_amplitude = 0.08f;
  t.block_seed = rng();
  return t;
}

SceneSpec random_scene(std::uint64_t seed, const geometry::CameraModel& camera,
                       const SceneOptions& options) {
  camera.check();
  if (options.min_layers > options.max_layers) throw std::invalid_argument("invalid layer count range");
  std::mt19937_64 rng(mix(seed ^ 0x5ce9e5ULL));
  SceneSpec spec;
  spec.seed = seed;
  spec.background_depth = uniform(rng, options.background_min_depth, options.background_max_depth);
  spec.background = random_texture(rng(), spec.background_depth, camera, options);
  spec.background.block_amplitude = 0.0f;
  spec.background.block_size = 0.0;

  const auto n_layers = std::uniform_int_distribution<std::size_t>(options.min_layers,
                                                                    options.max_layers)(rng);
  // Normalised view extent per metre of depth.
  const double half_w = 0.5 * static_cast<double>(camera.width) / camera.fx;
  const double half_h = 0.5 * static_cast<double>(camera.height) / camera.fy;
  const double off_x = (0.5 * static_cast<double>(camera.width - 1) - camera.cx) / camera.fx;
  const double off_y = (0.5 * static_cast<double>(camera.height - 1) - camera.cy) / camera.fy;
  for (std::size_t i = 0; i < n_layers; ++i) {
    Layer l;
    l.depth = uniform(rng, options.layer_min_depth, options.layer_max_depth);
    const double sx = half_w * l.depth;
    const double sy = half_h * l.depth;
    const double w = uniform(rng, 0.35, 0.9) * sx;
    const double h = uniform(rng, 0.35, 0.9) * sy;
    const double cx = off_x * l.depth + uniform(rng, -0.8, 0.8) * sx;
    const double cy = off_y * l.depth + uniform(rng, -0.8, 0.8) * sy;
    l.x_min = cx - w;
    l.x_max = cx + w;
    l.y_min = cy - h;
    l.y_max = cy + h;
    if (uniform(rng, 0.0, 1.0) < options.slant_probability) {
      // Keep every corner inside the layer depth band.
      const double room = std::min(l.depth - options.layer_min_depth, options.layer_max_depth - l.depth);
      const double max_slope = room / (w + h);
      l.slope_x = uniform(rng, -1.0, 1.0) * max_slope;
      l.slope_y = uniform(rng, -1.0, 1.0) * max_slope;
    }
    l.texture = random_texture(rng(), l.depth, camera, options);
    if (uniform(rng, 0.0, 1.0) < options.textureless_probability) l.texture.textureless = true;
    spec.layers.push_back(std::move(l));
  }
  std::sort(spec.layers.begin(), spec.layers.end(),
            [](const Layer& a, const Layer& b) { return a.depth < b.depth; });
  spec.check();
  return spec;
}

SceneSpec single_plane_scene(std::uint64_t seed, double depth, const geometry::CameraModel& camera,
                             const SceneOptions& options) {
  camera.check();
  SceneSpec spec;
  spec.seed = seed;
  spec.background_depth = depth;
  spec.background = random_texture(seed, depth, camera, options);
  spec.check();
  return spec;
}

}  // namespace mmvs::evalkit
