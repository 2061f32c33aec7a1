#include "mmvs/evalkit/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

#include "mmvs/evalkit/render.hpp"

namespace mmvs::evalkit {

void Sample::check() const {
  camera.check();
  reference.check();
  truth.check();
  if (neighbours.empty()) throw std::invalid_argument("sample needs at least one neighbour");
  const auto same = [&](const geometry::ImageBuffer& img) {
    return img.channels == 3 && img.height == camera.height && img.width == camera.width;
  };
  if (!same(reference) || truth.height != camera.height || truth.width != camera.width) {
    throw std::invalid_argument("sample images do not match the camera");
  }
  for (const auto& n : neighbours) {
    if (!same(n.image)) throw std::invalid_argument("sample images do not match the camera");
    n.pose.check();
  }
}

void MotionProfile::check() const {
  if (neighbours < 1) throw std::invalid_argument("motion profile needs at least one neighbour");
  if (!(min_translation >= 0.0) || !(max_translation >= min_translation)) {
    throw std::invalid_argument("invalid translation range in motion profile");
  }
  if (axis_weight_x < 0.0 || axis_weight_y < 0.0 || axis_weight_z < 0.0) {
    throw std::invalid_argument("axis weights must be non-negative");
  }
  if (max_translation > 0.0 && axis_weight_x + axis_weight_y + axis_weight_z == 0.0) {
    throw std::invalid_argument("translation requested but every axis is disabled");
  }
  if (!(max_rotation_deg >= 0.0) || max_rotation_deg > 45.0) {
    throw std::invalid_argument("rotation range must lie in [0, 45] degrees");
  }
}

MotionProfile MotionProfile::none(std::size_t neighbours) {
  MotionProfile m;
  m.neighbours = neighbours;
  m.min_translation = m.max_translation = 0.0;
  m.max_rotation_deg = 0.0;
  return m;
}

MotionProfile MotionProfile::translation_x(double magnitude, std::size_t neighbours) {
  MotionProfile m;
  m.neighbours = neighbours;
  m.min_translation = m.max_translation = magnitude;
  m.axis_weight_y = m.axis_weight_z = 0.0;
  m.max_rotation_deg = 0.0;
  return m;
}

geometry::RelativePose draw_pose(std::uint64_t seed, const MotionProfile& motion) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  if (motion.max_translation > 0.0) {
    Eigen::Vector3d dir;
    do {
      dir = Eigen::Vector3d(motion.axis_weight_x * gauss(rng), motion.axis_weight_y * gauss(rng),
                            motion.axis_weight_z * gauss(rng));
    } while (dir.norm() < 1e-6);
    const double mag = motion.min_translation + (motion.max_translation - motion.min_translation) * unit(rng);
    t = dir.normalized() * mag;
  }
  Eigen::Vector3d axis_angle = Eigen::Vector3d::Zero();
  if (motion.max_rotation_deg > 0.0) {
    Eigen::Vector3d axis;
    do {
      axis = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    } while (axis.norm() < 1e-6);
    const double angle = (2.0 * unit(rng) - 1.0) * motion.max_rotation_deg * std::numbers::pi / 180.0;
    axis_angle = axis.normalized() * angle;
  }
  return geometry::RelativePose::from_axis_angle(axis_angle, t);
}

double overlap_fraction(const Sample& sample, std::size_t neighbour) {
  const auto& cam = sample.camera;
  const auto& pose = sample.neighbours.at(neighbour).pose;
  const Eigen::Matrix3d k = cam.intrinsics();
  const Eigen::Matrix3d k_inv = cam.inverse_intrinsics();
  std::size_t inside = 0, total = 0;
  for (std::size_t y = 0; y < cam.height; ++y) {
    for (std::size_t x = 0; x < cam.width; ++x) {
      const auto i = y * cam.width + x;
      if (!sample.truth.valid(i)) continue;
      ++total;
      const Eigen::Vector3d X = sample.truth.values[i] * (k_inv * Eigen::Vector3d(double(x), double(y), 1.0));
      const Eigen::Vector3d q = k * pose.apply(X);
      if (q.z() <= 0.0) continue;
      const double u = q.x() / q.z(), v = q.y() / q.z();
      if (u >= 0.0 && u <= double(cam.width - 1) && v >= 0.0 && v <= double(cam.height - 1)) ++inside;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(inside) / static_cast<double>(total);
}

Sample build_sample(const SceneSpec& spec, const geometry::CameraModel& camera,
                    const MotionProfile& motion, std::string id) {
  motion.check();
  Sample s;
  s.id = std::move(id);
  s.seed = spec.seed;
  s.camera = camera;
  auto ref = render_scene(spec, camera, geometry::RelativePose::identity());
  s.reference = std::move(ref.image);
  s.truth = std::move(ref.depth);
  for (std::size_t k = 0; k < motion.neighbours; ++k) {
    const auto pose_seed = spec.seed * 0x9e3779b97f4a7c15ULL + 0x51ed2701ULL * (k + 1);
    NeighbourView view;
    view.pose = draw_pose(pose_seed, motion);
    view.image = render_scene(spec, camera, view.pose).image;
    s.neighbours.push_back(std::move(view));
  }
  for (std::size_t k = 0; k < s.neighbours.size(); ++k) {
    if (overlap_fraction(s, k) <= 0.0) {
      throw std::runtime_error("sample " + s.id + ": neighbour " + std::to_string(k) +
                               " has no image overlap with the reference");
    }
  }
  return s;
}

std::vector<Sample> build_dataset(const std::vector<SceneSpec>& specs,
                                  const geometry::CameraModel& camera, const MotionProfile& motion) {
  if (specs.empty()) throw std::invalid_argument("dataset needs at least one scene");
  std::vector<Sample> out;
  out.reserve(specs.size());
  char id[32];
  for (std::size_t i = 0; i < specs.size(); ++i) {
    std::snprintf(id, sizeof id, "sample_%04zu", i);
    out.push_back(build_sample(specs[i], camera, motion, id));
  }
  return out;
}

std::uint64_t scene_seed(std::uint64_t seed, std::size_t index) {
  std::uint64_t x = seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(index) + 1;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<Sample> generate_dataset(std::uint64_t seed, std::size_t count, const geometry::CameraModel& camera,
                                     const SceneOptions& options, const MotionProfile& motion) {
  if (count == 0) throw std::invalid_argument("dataset needs at least one scene");
  std::vector<SceneSpec> specs;
  specs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) specs.push_back(random_scene(scene_seed(seed, i), camera, options));
  return build_dataset(specs, camera, motion);
}

geometry::CameraModel default_camera(std::size_t width, std::size_t height) {
  geometry::CameraModel c;
  c.width = width;
  c.height = height;
  c.fx = c.fy = 56.0 * static_cast<double>(width) / 64.0;
  c.cx = 0.5 * static_cast<double>(width - 1);
  c.cy = 0.5 * static_cast<double>(height - 1);
  c.check();
  return c;
}

}  // namespace mmvs::evalkit
