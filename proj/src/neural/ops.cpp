#include "mmvs/neural/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmvs::nn {

namespace {

template <typename T>
using NodePtr = std::shared_ptr<detail::Node<T>>;

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
NodePtr<T> make_result(Shape shape, std::initializer_list<const Tensor<T>*> inputs) {
  auto node = std::make_shared<detail::Node<T>>();
  node->value.assign(shape_numel(shape), T(0));
  node->shape = std::move(shape);
  if (grad_enabled()) {
    for (const auto* in : inputs) {
      if (in->defined() && in->requires_grad()) node->requires_grad = true;
    }
    if (node->requires_grad) {
      for (const auto* in : inputs) {
        if (in->defined()) node->inputs.push_back(in->node());
      }
    }
  }
  return node;
}

template <typename T>
void require_rank(const Tensor<T>& x, std::size_t rank, const char* op) {
  if (!x.defined() || x.rank() != rank) {
    throw std::invalid_argument(std::string(op) + " expects a rank-" + std::to_string(rank) + " tensor");
  }
}

struct ConvGeometry {
  std::size_t channels, height, width, kernel, stride, padding, out_h, out_w;
  std::size_t rows() const { return channels * kernel * kernel; }
  std::size_t cols() const { return out_h * out_w; }
};

template <typename T>
void im2col(const T* image, const ConvGeometry& g, T* col) {
  const auto cols = g.cols();
  for (std::size_t c = 0; c < g.channels; ++c) {
    const T* plane = image + c * g.height * g.width;
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        T* row = col + ((c * g.kernel + ky) * g.kernel + kx) * cols;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.padding);
          T* out = row + oy * g.out_w;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) {
            std::fill(out, out + g.out_w, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(iy) * g.width;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.padding);
            out[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) ? T(0) : src[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const ConvGeometry& g, T* image) {
  const auto cols = g.cols();
  for (std::size_t c = 0; c < g.channels; ++c) {
    T* plane = image + c * g.height * g.width;
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        const T* row = col + ((c * g.kernel + ky) * g.kernel + kx) * cols;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.padding);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
          T* dst = plane + static_cast<std::size_t>(iy) * g.width;
          const T* in = row + oy * g.out_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.padding);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.width)) dst[ix] += in[ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 std::size_t stride, std::size_t padding) {
  require_rank(x, 4, "conv2d");
  require_rank(weight, 4, "conv2d weight");
  if (weight.dim(1) != x.dim(1) || weight.dim(2) != weight.dim(3)) {
    throw std::invalid_argument("conv2d weight " + shape_string(weight.shape()) +
                                " does not fit input " + shape_string(x.shape()));
  }
  if (stride < 1) throw std::invalid_argument("conv2d stride must be positive");
  const auto n = x.dim(0);
  const auto out_c = weight.dim(0);
  ConvGeometry g{x.dim(1), x.dim(2), x.dim(3), weight.dim(2), stride, padding, 0, 0};
  if (g.height + 2 * padding < g.kernel || g.width + 2 * padding < g.kernel) {
    throw std::invalid_argument("conv2d kernel larger than padded input");
  }
  g.out_h = (g.height + 2 * padding - g.kernel) / stride + 1;
  g.out_w = (g.width + 2 * padding - g.kernel) / stride + 1;
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != out_c)) {
    throw std::invalid_argument("conv2d bias must have one entry per output channel");
  }

  auto out = make_result<T>({n, out_c, g.out_h, g.out_w}, {&x, &weight, &bias});
  const auto rows = g.rows();
  const auto cols = g.cols();
  const auto in_size = g.channels * g.height * g.width;
  RowMatrix<T> col(rows, cols);
  RowMatrix<T> product(out_c, cols);
  const RowMatrix<T> w = Eigen::Map<const RowMatrix<T>>(weight.values().data(), out_c, rows);
  for (std::size_t b = 0; b < n; ++b) {
    im2col(x.values().data() + b * in_size, g, col.data());
    product.noalias() = w * col;
    Eigen::Map<RowMatrix<T>> y(out->value.data() + b * out_c * cols, out_c, cols);
    y = product;
    if (bias.defined()) {
      for (std::size_t o = 0; o < out_c; ++o) y.row(o).array() += bias.values()[o];
    }
  }

  if (out->requires_grad) {
    const bool has_bias = bias.defined();
    out->backward_fn = [g, n, out_c, rows, cols, in_size, has_bias](detail::Node<T>& self) {
      auto& xn = *self.inputs[0];
      auto& wn = *self.inputs[1];
      detail::Node<T>* bn = has_bias ? self.inputs[2].get() : nullptr;
      RowMatrix<T> col(rows, cols);
      RowMatrix<T> dy(out_c, cols);
      RowMatrix<T> dw_part(out_c, rows);
      const RowMatrix<T> w = Eigen::Map<const RowMatrix<T>>(wn.value.data(), out_c, rows);
      for (std::size_t b = 0; b < n; ++b) {
        dy = Eigen::Map<const RowMatrix<T>>(self.grad.data() + b * out_c * cols, out_c, cols);
        if (wn.requires_grad) {
          im2col(xn.value.data() + b * in_size, g, col.data());
          dw_part.noalias() = dy * col.transpose();
          Eigen::Map<RowMatrix<T>> dw(wn.grad_buffer().data(), out_c, rows);
          dw += dw_part;
        }
        if (bn != nullptr && bn->requires_grad) {
          auto& db = bn->grad_buffer();
          for (std::size_t o = 0; o < out_c; ++o) db[o] += dy.row(o).sum();
        }
        if (xn.requires_grad) {
          col.noalias() = w.transpose() * dy;
          col2im_add(col.data(), g, xn.grad_buffer().data() + b * in_size);
        }
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& x, std::size_t out_height, std::size_t out_width) {
  require_rank(x, 4, "upsample_nearest");
  const auto n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (out_height == 0 || out_width == 0) throw std::invalid_argument("upsample to an empty size");
  auto out = make_result<T>({n, c, out_height, out_width}, {&x});
  std::vector<std::size_t> src_index(out_height * out_width);
  for (std::size_t y = 0; y < out_height; ++y) {
    const auto sy = y * h / out_height;
    for (std::size_t xo = 0; xo < out_width; ++xo) src_index[y * out_width + xo] = sy * w + xo * w / out_width;
  }
  const auto in_plane = h * w;
  const auto out_plane = out_height * out_width;
  for (std::size_t p = 0; p < n * c; ++p) {
    const T* src = x.values().data() + p * in_plane;
    T* dst = out->value.data() + p * out_plane;
    for (std::size_t i = 0; i < out_plane; ++i) dst[i] = src[src_index[i]];
  }
  if (out->requires_grad) {
    out->backward_fn = [src_index = std::move(src_index), in_plane, out_plane, planes = n * c](detail::Node<T>& self) {
      auto& dx = self.inputs[0]->grad_buffer();
      for (std::size_t p = 0; p < planes; ++p) {
        const T* g = self.grad.data() + p * out_plane;
        T* d = dx.data() + p * in_plane;
        for (std::size_t i = 0; i < out_plane; ++i) d[src_index[i]] += g[i];
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> avg_pool2d(const Tensor<T>& x, std::size_t kernel) {
  require_rank(x, 4, "avg_pool2d");
  const auto n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (kernel == 0 || h % kernel != 0 || w % kernel != 0) {
    throw std::invalid_argument("avg_pool2d needs spatial dimensions divisible by the kernel");
  }
  const auto oh = h / kernel, ow = w / kernel;
  auto out = make_result<T>({n, c, oh, ow}, {&x});
  const T norm = T(1) / static_cast<T>(kernel * kernel);
  for (std::size_t p = 0; p < n * c; ++p) {
    const T* src = x.values().data() + p * h * w;
    T* dst = out->value.data() + p * oh * ow;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t xi = 0; xi < w; ++xi) dst[(y / kernel) * ow + xi / kernel] += src[y * w + xi];
    }
    for (std::size_t i = 0; i < oh * ow; ++i) dst[i] *= norm;
  }
  if (out->requires_grad) {
    out->backward_fn = [n, c, h, w, kernel, oh, ow, norm](detail::Node<T>& self) {
      auto& dx = self.inputs[0]->grad_buffer();
      for (std::size_t p = 0; p < n * c; ++p) {
        const T* g = self.grad.data() + p * oh * ow;
        T* d = dx.data() + p * h * w;
        for (std::size_t y = 0; y < h; ++y) {
          for (std::size_t xi = 0; xi < w; ++xi) d[y * w + xi] += norm * g[(y / kernel) * ow + xi / kernel];
        }
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     Tensor<T>& running_mean, Tensor<T>& running_var, bool training,
                     double momentum, double eps) {
  require_rank(x, 4, "batch_norm");
  const auto n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  for (const Tensor<T>* t : {&gamma, &beta, static_cast<const Tensor<T>*>(&running_mean), static_cast<const Tensor<T>*>(&running_var)}) {
    if (!t->defined() || t->numel() != c) throw std::invalid_argument("batch_norm parameter size mismatch");
  }
  const auto count = n * hw;
  if (training && count < 2) throw std::invalid_argument("batch_norm training needs more than one value per channel");

  auto out = make_result<T>(x.shape(), {&x, &gamma, &beta});
  std::vector<T> xhat(x.numel());
  std::vector<T> inv_std(c);
  const auto xv = x.values();
  for (std::size_t ch = 0; ch < c; ++ch) {
    double mu, var;
    if (training) {
      double s = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        const T* p = xv.data() + (b * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) s += p[i];
      }
      mu = s / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        const T* p = xv.data() + (b * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) sq += (p[i] - mu) * (p[i] - mu);
      }
      var = sq / static_cast<double>(count);
      auto rm = running_mean.mutable_values();
      auto rv = running_var.mutable_values();
      rm[ch] = static_cast<T>((1.0 - momentum) * rm[ch] + momentum * mu);
      rv[ch] = static_cast<T>((1.0 - momentum) * rv[ch] +
                              momentum * var * static_cast<double>(count) / static_cast<double>(count - 1));
    } else {
      mu = running_mean.values()[ch];
      var = running_var.values()[ch];
    }
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[ch] = static_cast<T>(is);
    const T g = gamma.values()[ch];
    const T bt = beta.values()[ch];
    for (std::size_t b = 0; b < n; ++b) {
      const auto off = (b * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        const T xh = static_cast<T>((xv[off + i] - mu) * is);
        xhat[off + i] = xh;
        out->value[off + i] = g * xh + bt;
      }
    }
  }
  if (out->requires_grad) {
    out->backward_fn = [xhat = std::move(xhat), inv_std = std::move(inv_std), n, c, hw, count,
                        training](detail::Node<T>& self) {
      auto& xn = *self.inputs[0];
      auto& gn = *self.inputs[1];
      auto& bn = *self.inputs[2];
      for (std::size_t ch = 0; ch < c; ++ch) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (std::size_t b = 0; b < n; ++b) {
          const auto off = (b * c + ch) * hw;
          for (std::size_t i = 0; i < hw; ++i) {
            sum_dy += self.grad[off + i];
            sum_dy_xhat += static_cast<double>(self.grad[off + i]) * xhat[off + i];
          }
        }
        if (gn.requires_grad) gn.grad_buffer()[ch] += static_cast<T>(sum_dy_xhat);
        if (bn.requires_grad) bn.grad_buffer()[ch] += static_cast<T>(sum_dy);
        if (!xn.requires_grad) continue;
        auto& dx = xn.grad_buffer();
        const double g = gn.value[ch];
        const double is = inv_std[ch];
        const double m = static_cast<double>(count);
        for (std::size_t b = 0; b < n; ++b) {
          const auto off = (b * c + ch) * hw;
          for (std::size_t i = 0; i < hw; ++i) {
            const double dy = self.grad[off + i];
            if (training) {
              dx[off + i] += static_cast<T>(g * is * (dy - sum_dy / m - xhat[off + i] * sum_dy_xhat / m));
            } else {
              dx[off + i] += static_cast<T>(g * is * dy);
            }
          }
        }
      }
    };
  }
  return Tensor<T>(out);
}

namespace {

template <typename T, typename Fwd, typename Deriv>
Tensor<T> unary(const Tensor<T>& x, Fwd fwd, Deriv deriv) {
  auto out = make_result<T>(x.shape(), {&x});
  const auto xv = x.values();
  for (std::size_t i = 0; i < xv.size(); ++i) out->value[i] = fwd(xv[i]);
  if (out->requires_grad) {
    out->backward_fn = [deriv](detail::Node<T>& self) {
      auto& in = *self.inputs[0];
      auto& dx = in.grad_buffer();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i] * deriv(in.value[i], self.value[i]);
    };
  }
  return Tensor<T>(out);
}

}  // namespace

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return unary(x, [](T v) { return v > T(0) ? v : T(0); },
               [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, double slope) {
  const T s = static_cast<T>(slope);
  return unary(x, [s](T v) { return v > T(0) ? v : s * v; },
               [s](T v, T) { return v > T(0) ? T(1) : s; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary(
      x,
      [](T v) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>> parts) {
  if (parts.empty()) throw std::invalid_argument("concat of zero tensors");
  const auto& first = parts.front();
  require_rank(first, 4, "concat_channels");
  std::size_t channels = 0;
  for (const auto& p : parts) {
    require_rank(p, 4, "concat_channels");
    if (p.dim(0) != first.dim(0) || p.dim(2) != first.dim(2) || p.dim(3) != first.dim(3)) {
      throw std::invalid_argument("concat_channels shape mismatch: " + shape_string(p.shape()) +
                                  " vs " + shape_string(first.shape()));
    }
    channels += p.dim(1);
  }
  const auto n = first.dim(0), hw = first.dim(2) * first.dim(3);
  auto out = std::make_shared<detail::Node<T>>();
  out->shape = {n, channels, first.dim(2), first.dim(3)};
  out->value.resize(n * channels * hw);
  if (grad_enabled()) {
    for (const auto& p : parts) out->requires_grad = out->requires_grad || p.requires_grad();
    if (out->requires_grad) {
      for (const auto& p : parts) out->inputs.push_back(p.node());
    }
  }
  std::size_t c0 = 0;
  for (const auto& p : parts) {
    const auto pc = p.dim(1);
    for (std::size_t b = 0; b < n; ++b) {
      std::copy_n(p.values().data() + b * pc * hw, pc * hw, out->value.data() + (b * channels + c0) * hw);
    }
    c0 += pc;
  }
  if (out->requires_grad) {
    out->backward_fn = [n, channels, hw](detail::Node<T>& self) {
      std::size_t c0 = 0;
      for (auto& in : self.inputs) {
        const auto pc = in->shape[1];
        if (in->requires_grad) {
          auto& dx = in->grad_buffer();
          for (std::size_t b = 0; b < n; ++b) {
            const T* g = self.grad.data() + (b * channels + c0) * hw;
            T* d = dx.data() + b * pc * hw;
            for (std::size_t i = 0; i < pc * hw; ++i) d[i] += g[i];
          }
        }
        c0 += pc;
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> group_mean(const Tensor<T>& x, std::span<const std::size_t> group_sizes) {
  if (!x.defined() || x.rank() < 1) throw std::invalid_argument("group_mean needs a batched tensor");
  std::size_t total = 0;
  for (auto g : group_sizes) {
    if (g == 0) throw std::invalid_argument("group_mean groups must be non-empty");
    total += g;
  }
  if (total != x.dim(0)) throw std::invalid_argument("group sizes do not cover the batch axis");
  Shape shape = x.shape();
  shape[0] = group_sizes.size();
  const auto row = x.numel() / x.dim(0);
  auto out = make_result<T>(shape, {&x});
  std::vector<std::size_t> sizes(group_sizes.begin(), group_sizes.end());
  std::size_t src = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    T* dst = out->value.data() + g * row;
    for (std::size_t k = 0; k < sizes[g]; ++k, ++src) {
      const T* s = x.values().data() + src * row;
      for (std::size_t i = 0; i < row; ++i) dst[i] += s[i];
    }
    const T denom = static_cast<T>(sizes[g]);
    for (std::size_t i = 0; i < row; ++i) dst[i] /= denom;
  }
  if (out->requires_grad) {
    out->backward_fn = [sizes = std::move(sizes), row](detail::Node<T>& self) {
      auto& dx = self.inputs[0]->grad_buffer();
      std::size_t src = 0;
      for (std::size_t g = 0; g < sizes.size(); ++g) {
        const T inv = T(1) / static_cast<T>(sizes[g]);
        const T* gr = self.grad.data() + g * row;
        for (std::size_t k = 0; k < sizes[g]; ++k, ++src) {
          T* d = dx.data() + src * row;
          for (std::size_t i = 0; i < row; ++i) d[i] += gr[i] * inv;
        }
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("add: shape mismatch");
  auto out = make_result<T>(a.shape(), {&a, &b});
  for (std::size_t i = 0; i < out->value.size(); ++i) out->value[i] = a.values()[i] + b.values()[i];
  if (out->requires_grad) {
    out->backward_fn = [](detail::Node<T>& self) {
      for (auto& in : self.inputs) {
        if (!in->requires_grad) continue;
        auto& d = in->grad_buffer();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i];
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("mul: shape mismatch");
  auto out = make_result<T>(a.shape(), {&a, &b});
  for (std::size_t i = 0; i < out->value.size(); ++i) out->value[i] = a.values()[i] * b.values()[i];
  if (out->requires_grad) {
    out->backward_fn = [](detail::Node<T>& self) {
      auto& an = *self.inputs[0];
      auto& bn = *self.inputs[1];
      if (an.requires_grad) {
        auto& d = an.grad_buffer();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i] * bn.value[i];
      }
      if (bn.requires_grad) {
        auto& d = bn.grad_buffer();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i] * an.value[i];
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, double factor) {
  const T f = static_cast<T>(factor);
  return unary(a, [f](T v) { return v * f; }, [f](T, T) { return f; });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  auto out = make_result<T>({1}, {&a});
  double s = 0.0;
  for (T v : a.values()) s += v;
  out->value[0] = static_cast<T>(s);
  if (out->requires_grad) {
    out->backward_fn = [](detail::Node<T>& self) {
      auto& d = self.inputs[0]->grad_buffer();
      for (auto& v : d) v += self.grad[0];
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

template <typename T>
Tensor<T> bce_loss(const Tensor<T>& pred, std::span<const float> target,
                   std::span<const std::uint8_t> pixel_valid) {
  require_rank(pred, 4, "bce_loss");
  const auto n = pred.dim(0), planes = pred.dim(1), hw = pred.dim(2) * pred.dim(3);
  if (target.size() != pred.numel() || pixel_valid.size() != n * hw) {
    throw std::invalid_argument("bce_loss target/validity size mismatch for " + shape_string(pred.shape()));
  }
  constexpr double lo = 1e-7, hi = 1.0 - 1e-7;
  std::size_t cells = 0;
  for (auto v : pixel_valid) cells += v != 0;
  cells *= planes;
  if (cells == 0) throw std::runtime_error("bce_loss: no valid cells");
  double total = 0.0;
  const auto pv = pred.values();
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t d = 0; d < planes; ++d) {
      for (std::size_t i = 0; i < hw; ++i) {
        if (!pixel_valid[b * hw + i]) continue;
        const auto k = (b * planes + d) * hw + i;
        const double p = std::clamp(static_cast<double>(pv[k]), lo, hi);
        const double y = target[k];
        total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
      }
    }
  }
  auto out = make_result<T>({1}, {&pred});
  out->value[0] = static_cast<T>(total / static_cast<double>(cells));
  if (out->requires_grad) {
    std::vector<float> tgt(target.begin(), target.end());
    std::vector<std::uint8_t> valid(pixel_valid.begin(), pixel_valid.end());
    out->backward_fn = [tgt = std::move(tgt), valid = std::move(valid), n, planes, hw,
                        cells](detail::Node<T>& self) {
      auto& in = *self.inputs[0];
      auto& dx = in.grad_buffer();
      const double scale = static_cast<double>(self.grad[0]) / static_cast<double>(cells);
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t d = 0; d < planes; ++d) {
          for (std::size_t i = 0; i < hw; ++i) {
            if (!valid[b * hw + i]) continue;
            const auto k = (b * planes + d) * hw + i;
            const double p = in.value[k];
            if (p <= lo || p >= hi) continue;  // clamped: flat
            const double y = tgt[k];
            dx[k] += static_cast<T>(scale * (-y / p + (1.0 - y) / (1.0 - p)));
          }
        }
      }
    };
  }
  return Tensor<T>(out);
}

template <typename T>
Tensor<T> l1_loss(const Tensor<T>& pred, std::span<const float> target,
                  std::span<const std::uint8_t> pixel_valid) {
  require_rank(pred, 4, "l1_loss");
  if (pred.dim(1) != 1 || target.size() != pred.numel() || pixel_valid.size() != pred.numel()) {
    throw std::invalid_argument("l1_loss expects an [N, 1, H, W] prediction with matching target");
  }
  std::size_t count = 0;
  double total = 0.0;
  const auto pv = pred.values();
  for (std::size_t k = 0; k < pv.size(); ++k) {
    if (!pixel_valid[k]) continue;
    total += std::abs(static_cast<double>(pv[k]) - target[k]);
    ++count;
  }
  if (count == 0) throw std::runtime_error("l1_loss: no valid pixels");
  auto out = make_result<T>({1}, {&pred});
  out->value[0] = static_cast<T>(total / static_cast<double>(count));
  if (out->requires_grad) {
    std::vector<float> tgt(target.begin(), target.end());
    std::vector<std::uint8_t> valid(pixel_valid.begin(), pixel_valid.end());
    out->backward_fn = [tgt = std::move(tgt), valid = std::move(valid), count](detail::Node<T>& self) {
      auto& in = *self.inputs[0];
      auto& dx = in.grad_buffer();
      const double scale = static_cast<double>(self.grad[0]) / static_cast<double>(count);
      for (std::size_t k = 0; k < dx.size(); ++k) {
        if (!valid[k]) continue;
        const double diff = static_cast<double>(in.value[k]) - tgt[k];
        if (diff > 0.0) dx[k] += static_cast<T>(scale);
        else if (diff < 0.0) dx[k] -= static_cast<T>(scale);
      }
    };
  }
  return Tensor<T>(out);
}

#define MMVS_INSTANTIATE_OPS(T)                                                                    \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t,     \
                            std::size_t);                                                          \
  template Tensor<T> upsample_nearest(const Tensor<T>&, std::size_t, std::size_t);                 \
  template Tensor<T> avg_pool2d(const Tensor<T>&, std::size_t);                                    \
  template Tensor<T> batch_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&,  \
                                Tensor<T>&, bool, double, double);                                 \
  template Tensor<T> relu(const Tensor<T>&);                                                       \
  template Tensor<T> leaky_relu(const Tensor<T>&, double);                                         \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                    \
  template Tensor<T> concat_channels(std::span<const Tensor<T>>);                                  \
  template Tensor<T> group_mean(const Tensor<T>&, std::span<const std::size_t>);                   \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> scale(const Tensor<T>&, double);                                              \
  template Tensor<T> sum(const Tensor<T>&);                                                        \
  template Tensor<T> mean(const Tensor<T>&);                                                       \
  template Tensor<T> bce_loss(const Tensor<T>&, std::span<const float>, std::span<const std::uint8_t>); \
  template Tensor<T> l1_loss(const Tensor<T>&, std::span<const float>, std::span<const std::uint8_t>);

MMVS_INSTANTIATE_OPS(float)
MMVS_INSTANTIATE_OPS(double)

#undef MMVS_INSTANTIATE_OPS

}  // namespace mmvs::nn
