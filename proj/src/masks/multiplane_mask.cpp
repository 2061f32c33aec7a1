#include "mmvs/masks/multiplane_mask.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmvs::masks {

void MultiplaneMask::check() const {
  if (values.size() != planes * height * width) {
    throw std::invalid_argument("mask storage does not match planes x height x width");
  }
  if (!validity.empty() && validity.size() != height * width) {
    throw std::invalid_argument("mask validity has the wrong size");
  }
  for (float v : values) {
    if (!(v >= 0.0f && v <= 1.0f)) throw std::invalid_argument("mask values must lie in [0, 1]");
  }
}

MultiplaneMask make_ground_truth_masks(const DepthMap& depth, const sampling::PlaneSet& planes) {
  depth.check();
  planes.check();
  MultiplaneMask m;
  m.planes = planes.size();
  m.height = depth.height;
  m.width = depth.width;
  m.values.assign(m.planes * depth.pixel_count(), 0.0f);
  m.validity = depth.validity;
  const auto n = depth.pixel_count();
  for (std::size_t p = 0; p < n; ++p) {
    if (!depth.valid(p)) continue;
    for (std::size_t i = 0; i < m.planes; ++i) {
      m.values[i * n + p] = depth.values[p] <= planes.depths[i] ? 1.0f : 0.0f;
    }
  }
  return m;
}

MultiplaneMask fuse_masks(std::span<const MultiplaneMask> per_neighbour) {
  if (per_neighbour.empty()) throw std::invalid_argument("cannot fuse an empty mask list");
  const auto& first = per_neighbour.front();
  for (const auto& m : per_neighbour) {
    if (!m.same_shape(first) || m.values.size() != first.values.size()) {
      throw std::invalid_argument("fused masks must share one shape");
    }
  }
  MultiplaneMask out;
  out.planes = first.planes;
  out.height = first.height;
  out.width = first.width;
  out.values.assign(first.values.size(), 0.0f);
  const auto count = static_cast<double>(per_neighbour.size());
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    double sum = 0.0;
    for (const auto& m : per_neighbour) sum += m.values[k];
    out.values[k] = static_cast<float>(sum / count);
  }
  const bool any_validity = std::any_of(per_neighbour.begin(), per_neighbour.end(),
                                        [](const MultiplaneMask& m) { return !m.validity.empty(); });
  if (any_validity) {
    out.validity.assign(out.pixel_count(), 1);
    for (const auto& m : per_neighbour) {
      if (m.validity.empty()) continue;
      for (std::size_t p = 0; p < out.validity.size(); ++p) out.validity[p] &= m.validity[p];
    }
  }
  return out;
}

double decode_profile(std::span<const float> profile, std::span<const double> depths) {
  if (profile.size() != depths.size() || profile.empty()) {
    throw std::invalid_argument("mask profile and plane depths differ in length");
  }
  double prev = 0.0;
  double running = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    running = std::max(running, static_cast<double>(profile[i]));
    if (running >= 0.5) {
      if (i == 0) return depths[0];
      const double t = (0.5 - prev) / (running - prev);
      return depths[i - 1] + t * (depths[i] - depths[i - 1]);
    }
    prev = running;
  }
  return depths.back();
}

DepthMap decode_depth_from_masks(const MultiplaneMask& mask, const sampling::PlaneSet& planes) {
  mask.check();
  planes.check();
  if (mask.planes != planes.size()) {
    throw std::invalid_argument("mask plane count does not match the plane set");
  }
  DepthMap out;
  out.height = mask.height;
  out.width = mask.width;
  out.values.resize(mask.pixel_count());
  out.validity.assign(mask.pixel_count(), 1);
  const auto n = mask.pixel_count();
  std::vector<float> profile(mask.planes);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < mask.planes; ++i) profile[i] = mask.values[i * n + p];
    out.values[p] = decode_profile(profile, planes.depths);
    if (!mask.valid(p)) out.validity[p] = 0;
  }
  return out;
}

}  // namespace mmvs::masks
