#include "mmvs/neural/convert.hpp"

#include <algorithm>
#include <stdexcept>

namespace mmvs::nn {

template <typename T>
Tensor<T> stack_volumes(std::span<const geometry::WarpVolume> volumes) {
  if (volumes.empty()) throw std::invalid_argument("no warp volumes to stack");
  const auto& f = volumes.front();
  std::vector<T> data;
  data.reserve(volumes.size() * f.data.size());
  for (const auto& v : volumes) {
    if (v.channels != f.channels || v.height != f.height || v.width != f.width) {
      throw std::invalid_argument("warp volumes differ in shape");
    }
    data.insert(data.end(), v.data.begin(), v.data.end());
  }
  return Tensor<T>({volumes.size(), f.channels, f.height, f.width}, std::move(data));
}

template <typename T>
Tensor<T> stack_images(std::span<const geometry::ImageBuffer> images) {
  if (images.empty()) throw std::invalid_argument("no images to stack");
  const auto& f = images.front();
  std::vector<T> data;
  data.reserve(images.size() * f.data.size());
  for (const auto& im : images) {
    if (im.channels != f.channels || im.height != f.height || im.width != f.width) {
      throw std::invalid_argument("images differ in shape");
    }
    data.insert(data.end(), im.data.begin(), im.data.end());
  }
  return Tensor<T>({images.size(), f.channels, f.height, f.width}, std::move(data));
}

template <typename T>
Tensor<T> stack_masks(std::span<const masks::MultiplaneMask> stack) {
  if (stack.empty()) throw std::invalid_argument("no masks to stack");
  const auto& f = stack.front();
  std::vector<T> data;
  data.reserve(stack.size() * f.values.size());
  for (const auto& m : stack) {
    if (!m.same_shape(f)) throw std::invalid_argument("masks differ in shape");
    data.insert(data.end(), m.values.begin(), m.values.end());
  }
  return Tensor<T>({stack.size(), f.planes, f.height, f.width}, std::move(data));
}

template <typename T>
masks::MultiplaneMask mask_from_tensor(const Tensor<T>& t, std::size_t index) {
  if (t.rank() != 4 || index >= t.dim(0)) throw std::invalid_argument("mask_from_tensor: bad tensor or index");
  masks::MultiplaneMask m;
  m.planes = t.dim(1);
  m.height = t.dim(2);
  m.width = t.dim(3);
  const auto row = m.planes * m.height * m.width;
  const auto v = t.values().subspan(index * row, row);
  m.values.assign(v.begin(), v.end());
  return m;
}

template <typename T>
DepthConversion depth_from_inverse(const Tensor<T>& t, std::size_t index, double floor) {
  if (t.rank() != 4 || t.dim(1) != 1 || index >= t.dim(0)) {
    throw std::invalid_argument("depth_from_inverse expects an [N, 1, H, W] tensor");
  }
  if (!(floor > 0.0)) throw std::invalid_argument("inverse-depth floor must be positive");
  DepthConversion out;
  out.depth.height = t.dim(2);
  out.depth.width = t.dim(3);
  const auto n = out.depth.height * out.depth.width;
  out.depth.values.resize(n);
  out.depth.validity.assign(n, 1);
  const auto v = t.values().subspan(index * n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double inv = v[i];
    if (inv < floor) {
      inv = floor;
      ++out.floored;
    }
    out.depth.values[i] = 1.0 / inv;
  }
  return out;
}

#define MMVS_INSTANTIATE_CONVERT(T)                                                         \
  template Tensor<T> stack_volumes(std::span<const geometry::WarpVolume>);                  \
  template Tensor<T> stack_images(std::span<const geometry::ImageBuffer>);                  \
  template Tensor<T> stack_masks(std::span<const masks::MultiplaneMask>);                   \
  template masks::MultiplaneMask mask_from_tensor(const Tensor<T>&, std::size_t);           \
  template DepthConversion depth_from_inverse(const Tensor<T>&, std::size_t, double);

MMVS_INSTANTIATE_CONVERT(float)
MMVS_INSTANTIATE_CONVERT(double)

#undef MMVS_INSTANTIATE_CONVERT

}  // namespace mmvs::nn
