#include "emoface/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "emoface/errors.hpp"

namespace emoface::nn {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ContractError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                        shape_string(b.shape()));
  }
}

void require_ndim(const Var& x, int n, const char* op) {
  if (x.value().ndim() != n) {
    throw ContractError(std::string(op) + ": expected " + std::to_string(n) + "-D input, got " +
                        shape_string(x.shape()));
  }
}

// Parent i wants a gradient.
inline bool wants(Node& self, std::size_t i) { return self.parents[i]->requires_grad; }
inline Tensor& pgrad(Node& self, std::size_t i) { return self.parents[i]->grad_buffer(); }
inline const Tensor& pval(Node& self, std::size_t i) { return self.parents[i]->value; }

template <class F, class D>
Var unary(const Var& x, F f, D dfdx_from_xy) {
  Tensor out(x.shape());
  const float* xv = x.value().data();
  float* ov = out.data();
  for (std::size_t i = 0; i < out.numel(); ++i) ov[i] = f(xv[i]);
  return make_result(std::move(out), {x}, [dfdx_from_xy](Node& self) {
    if (!wants(self, 0)) return;
    const float* xv = pval(self, 0).data();
    const float* yv = self.value.data();
    const float* g = self.grad.data();
    float* gx = pgrad(self, 0).data();
    for (std::size_t i = 0; i < self.value.numel(); ++i) gx[i] += g[i] * dfdx_from_xy(xv[i], yv[i]);
  });
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] + b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (!wants(self, p)) continue;
      Tensor& g = pgrad(self, p);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] - b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    if (wants(self, 0)) {
      Tensor& g = pgrad(self, 0);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
    }
    if (wants(self, 1)) {
      Tensor& g = pgrad(self, 1);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] * b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    if (wants(self, 0)) {
      Tensor& g = pgrad(self, 0);
      const Tensor& bv = pval(self, 1);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * bv[i];
    }
    if (wants(self, 1)) {
      Tensor& g = pgrad(self, 1);
      const Tensor& av = pval(self, 0);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * av[i];
    }
  });
}

Var scale(const Var& a, float s) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] * s;
  return make_result(std::move(out), {a}, [s](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * s;
  });
}

Var add_scalar(const Var& a, float s) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] + s;
  return make_result(std::move(out), {a}, [](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
  });
}

Var square(const Var& a) {
  return unary(a, [](float x) { return x * x; }, [](float x, float) { return 2.0f * x; });
}

Var tanh(const Var& x) {
  return unary(x, [](float v) { return std::tanh(v); }, [](float, float y) { return 1.0f - y * y; });
}

Var sigmoid(const Var& x) {
  return unary(
      x, [](float v) { return 1.0f / (1.0f + std::exp(-v)); }, [](float, float y) { return y * (1.0f - y); });
}

Var relu(const Var& x) {
  return unary(x, [](float v) { return v > 0.0f ? v : 0.0f; }, [](float v, float) { return v > 0.0f ? 1.0f : 0.0f; });
}

Var leaky_relu(const Var& x, float slope) {
  return unary(
      x, [slope](float v) { return v > 0.0f ? v : slope * v; },
      [slope](float v, float) { return v > 0.0f ? 1.0f : slope; });
}

Var softplus(const Var& x) {
  return unary(
      x, [](float v) { return v > 20.0f ? v : std::log1p(std::exp(v)); },
      [](float v, float) { return 1.0f / (1.0f + std::exp(-v)); });
}

Var add_bias(const Var& x, const Var& bias) {
  const Shape& s = x.shape();
  if (s.size() < 2 || bias.value().numel() != static_cast<std::size_t>(s[1])) {
    throw ContractError("add_bias: bias size must match dimension 1 of " + shape_string(s));
  }
  const int n = s[0], c = s[1];
  const std::size_t inner = x.value().numel() / (static_cast<std::size_t>(n) * c);
  Tensor out = x.value();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < c; ++j) {
      float* o = out.data() + (static_cast<std::size_t>(i) * c + j) * inner;
      const float b = bias.value()[j];
      for (std::size_t k = 0; k < inner; ++k) o[k] += b;
    }
  return make_result(std::move(out), {x, bias}, [n, c, inner](Node& self) {
    if (wants(self, 0)) {
      Tensor& g = pgrad(self, 0);
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
    }
    if (wants(self, 1)) {
      Tensor& gb = pgrad(self, 1);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) {
          const float* g = self.grad.data() + (static_cast<std::size_t>(i) * c + j) * inner;
          double acc = 0.0;
          for (std::size_t k = 0; k < inner; ++k) acc += g[k];
          gb[j] += static_cast<float>(acc);
        }
    }
  });
}

Var matmul(const Var& a, const Var& b) {
  require_ndim(a, 2, "matmul");
  require_ndim(b, 2, "matmul");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ContractError("matmul: inner dimensions differ " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Tensor out({m, n});
  MapMat(out.data(), m, n).noalias() = CMapMat(a.value().data(), m, k) * CMapMat(b.value().data(), k, n);
  return make_result(std::move(out), {a, b}, [m, k, n](Node& self) {
    CMapMat g(self.grad.data(), m, n);
    if (wants(self, 0)) {
      MapMat(pgrad(self, 0).data(), m, k).noalias() += g * CMapMat(pval(self, 1).data(), k, n).transpose();
    }
    if (wants(self, 1)) {
      MapMat(pgrad(self, 1).data(), k, n).noalias() += CMapMat(pval(self, 0).data(), m, k).transpose() * g;
    }
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  Var y = matmul(x, w);
  return b.defined() ? add_bias(y, b) : y;
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return make_result(std::move(out), {x}, [](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
  });
}

Var concat(const std::vector<Var>& xs, int dim) {
  if (xs.empty()) throw ContractError("concat: no inputs");
  const Shape& s0 = xs[0].shape();
  const int nd = static_cast<int>(s0.size());
  if (dim < 0) dim += nd;
  if (dim < 0 || dim >= nd) throw ContractError("concat: bad dimension");
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < dim; ++i) outer *= s0[i];
  for (int i = dim + 1; i < nd; ++i) inner *= s0[i];
  Shape out_shape = s0;
  out_shape[dim] = 0;
  std::vector<int> sizes;
  for (const auto& x : xs) {
    const Shape& s = x.shape();
    if (static_cast<int>(s.size()) != nd) throw ContractError("concat: rank mismatch");
    for (int i = 0; i < nd; ++i)
      if (i != dim && s[i] != s0[i]) {
        throw ContractError("concat: shape mismatch " + shape_string(s) + " vs " + shape_string(s0));
      }
    sizes.push_back(s[dim]);
    out_shape[dim] += s[dim];
  }
  Tensor out(out_shape);
  const std::size_t out_row = static_cast<std::size_t>(out_shape[dim]) * inner;
  std::size_t offset = 0;
  for (std::size_t p = 0; p < xs.size(); ++p) {
    const std::size_t row = static_cast<std::size_t>(sizes[p]) * inner;
    const float* src = xs[p].value().data();
    for (std::size_t o = 0; o < outer; ++o) std::copy_n(src + o * row, row, out.data() + o * out_row + offset);
    offset += row;
  }
  return make_result(std::move(out), xs, [sizes, outer, inner, out_row](Node& self) {
    std::size_t offset = 0;
    for (std::size_t p = 0; p < sizes.size(); ++p) {
      const std::size_t row = static_cast<std::size_t>(sizes[p]) * inner;
      if (wants(self, p)) {
        float* g = pgrad(self, p).data();
        for (std::size_t o = 0; o < outer; ++o) {
          const float* src = self.grad.data() + o * out_row + offset;
          for (std::size_t k = 0; k < row; ++k) g[o * row + k] += src[k];
        }
      }
      offset += row;
    }
  });
}

Var slice(const Var& x, int dim, int start, int length) {
  const Shape& s = x.shape();
  const int nd = static_cast<int>(s.size());
  if (dim < 0) dim += nd;
  if (dim < 0 || dim >= nd || start < 0 || length < 0 || start + length > s[dim]) {
    throw ContractError("slice: range out of bounds for " + shape_string(s));
  }
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < dim; ++i) outer *= s[i];
  for (int i = dim + 1; i < nd; ++i) inner *= s[i];
  Shape out_shape = s;
  out_shape[dim] = length;
  Tensor out(out_shape);
  const std::size_t in_row = static_cast<std::size_t>(s[dim]) * inner;
  const std::size_t row = static_cast<std::size_t>(length) * inner;
  const std::size_t off = static_cast<std::size_t>(start) * inner;
  for (std::size_t o = 0; o < outer; ++o) std::copy_n(x.value().data() + o * in_row + off, row, out.data() + o * row);
  return make_result(std::move(out), {x}, [outer, in_row, row, off](Node& self) {
    if (!wants(self, 0)) return;
    float* g = pgrad(self, 0).data();
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t k = 0; k < row; ++k) g[o * in_row + off + k] += self.grad[o * row + k];
  });
}

Var broadcast_spatial(const Var& x, int height, int width) {
  require_ndim(x, 2, "broadcast_spatial");
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t hw = static_cast<std::size_t>(height) * width;
  Tensor out({n, c, height, width});
  for (int i = 0; i < n * c; ++i) std::fill_n(out.data() + i * hw, hw, x.value()[i]);
  return make_result(std::move(out), {x}, [n, c, hw](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    for (int i = 0; i < n * c; ++i) {
      double acc = 0.0;
      const float* src = self.grad.data() + i * hw;
      for (std::size_t k = 0; k < hw; ++k) acc += src[k];
      g[i] += static_cast<float>(acc);
    }
  });
}

Var broadcast_nodes(const Var& x, int count) {
  require_ndim(x, 2, "broadcast_nodes");
  const int n = x.dim(0), d = x.dim(1);
  Tensor out({n, count, d});
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < count; ++k)
      std::copy_n(x.value().data() + static_cast<std::size_t>(i) * d, d,
                  out.data() + (static_cast<std::size_t>(i) * count + k) * d);
  return make_result(std::move(out), {x}, [n, count, d](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < count; ++k)
        for (int j = 0; j < d; ++j) g[static_cast<std::size_t>(i) * d + j] += self.grad.at(i, k, j);
  });
}

Var mean_nodes(const Var& x) {
  require_ndim(x, 3, "mean_nodes");
  const int n = x.dim(0), k = x.dim(1), d = x.dim(2);
  Tensor out({n, d});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int v = 0; v < k; ++v) acc += x.value().at(i, v, j);
      out.at(i, j) = static_cast<float>(acc / k);
    }
  return make_result(std::move(out), {x}, [n, k, d](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    const float inv = 1.0f / static_cast<float>(k);
    for (int i = 0; i < n; ++i)
      for (int v = 0; v < k; ++v)
        for (int j = 0; j < d; ++j) g.at(i, v, j) += self.grad.at(i, j) * inv;
  });
}

namespace {

struct ConvGeometry {
  int n, c, h, w, o, k, stride, pad, ho, wo;
  std::size_t col_rows() const { return static_cast<std::size_t>(c) * k * k; }
  std::size_t col_cols() const { return static_cast<std::size_t>(ho) * wo; }
};

void im2col(const float* x, const ConvGeometry& g, float* cols) {
  const std::size_t hw_out = g.col_cols();
  for (int ci = 0; ci < g.c; ++ci)
    for (int ki = 0; ki < g.k; ++ki)
      for (int kj = 0; kj < g.k; ++kj) {
        float* row = cols + ((static_cast<std::size_t>(ci) * g.k + ki) * g.k + kj) * hw_out;
        const float* plane = x + static_cast<std::size_t>(ci) * g.h * g.w;
        for (int oh = 0; oh < g.ho; ++oh) {
          const int ih = oh * g.stride - g.pad + ki;
          float* dst = row + static_cast<std::size_t>(oh) * g.wo;
          if (ih < 0 || ih >= g.h) {
            std::fill_n(dst, g.wo, 0.0f);
            continue;
          }
          const float* src = plane + static_cast<std::size_t>(ih) * g.w;
          for (int ow = 0; ow < g.wo; ++ow) {
            const int iw = ow * g.stride - g.pad + kj;
            dst[ow] = (iw >= 0 && iw < g.w) ? src[iw] : 0.0f;
          }
        }
      }
}

void col2im_add(const float* cols, const ConvGeometry& g, float* dx) {
  const std::size_t hw_out = g.col_cols();
  for (int ci = 0; ci < g.c; ++ci)
    for (int ki = 0; ki < g.k; ++ki)
      for (int kj = 0; kj < g.k; ++kj) {
        const float* row = cols + ((static_cast<std::size_t>(ci) * g.k + ki) * g.k + kj) * hw_out;
        float* plane = dx + static_cast<std::size_t>(ci) * g.h * g.w;
        for (int oh = 0; oh < g.ho; ++oh) {
          const int ih = oh * g.stride - g.pad + ki;
          if (ih < 0 || ih >= g.h) continue;
          const float* src = row + static_cast<std::size_t>(oh) * g.wo;
          float* dst = plane + static_cast<std::size_t>(ih) * g.w;
          for (int ow = 0; ow < g.wo; ++ow) {
            const int iw = ow * g.stride - g.pad + kj;
            if (iw >= 0 && iw < g.w) dst[iw] += src[ow];
          }
        }
      }
}

}  // namespace

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int padding) {
  require_ndim(x, 4, "conv2d");
  require_ndim(weight, 4, "conv2d");
  ConvGeometry g{};
  g.n = x.dim(0);
  g.c = x.dim(1);
  g.h = x.dim(2);
  g.w = x.dim(3);
  g.o = weight.dim(0);
  g.k = weight.dim(2);
  g.stride = stride;
  g.pad = padding;
  if (weight.dim(1) != g.c || weight.dim(3) != g.k) {
    throw ContractError("conv2d: weight " + shape_string(weight.shape()) + " incompatible with input " +
                        shape_string(x.shape()));
  }
  g.ho = (g.h + 2 * padding - g.k) / stride + 1;
  g.wo = (g.w + 2 * padding - g.k) / stride + 1;
  if (g.ho <= 0 || g.wo <= 0) throw ContractError("conv2d: output would be empty");

  const std::size_t rows = g.col_rows(), cols_n = g.col_cols();
  auto cols = std::make_shared<Storage>(static_cast<std::size_t>(g.n) * rows * cols_n);
  Tensor out({g.n, g.o, g.ho, g.wo});
  CMapMat wmat(weight.value().data(), g.o, static_cast<Eigen::Index>(rows));
  for (int i = 0; i < g.n; ++i) {
    float* ci = cols->data() + static_cast<std::size_t>(i) * rows * cols_n;
    im2col(x.value().data() + static_cast<std::size_t>(i) * g.c * g.h * g.w, g, ci);
    MapMat(out.data() + static_cast<std::size_t>(i) * g.o * cols_n, g.o, static_cast<Eigen::Index>(cols_n)).noalias() =
        wmat * CMapMat(ci, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols_n));
  }
  if (bias.defined()) {
    for (int i = 0; i < g.n; ++i)
      for (int oc = 0; oc < g.o; ++oc) {
        float* o = out.data() + (static_cast<std::size_t>(i) * g.o + oc) * cols_n;
        const float b = bias.value()[oc];
        for (std::size_t k = 0; k < cols_n; ++k) o[k] += b;
      }
  }
  std::vector<Var> parents{x, weight};
  if (bias.defined()) parents.push_back(bias);
  const bool has_bias = bias.defined();
  return make_result(std::move(out), parents, [g, cols, has_bias](Node& self) {
    const std::size_t rows = g.col_rows(), cols_n = g.col_cols();
    const auto R = static_cast<Eigen::Index>(rows), C = static_cast<Eigen::Index>(cols_n);
    const bool need_x = wants(self, 0), need_w = wants(self, 1);
    CMapMat wmat(pval(self, 1).data(), g.o, R);
    Storage dcols(need_x ? rows * cols_n : 0);
    for (int i = 0; i < g.n; ++i) {
      CMapMat gi(self.grad.data() + static_cast<std::size_t>(i) * g.o * cols_n, g.o, C);
      const float* ci = cols->data() + static_cast<std::size_t>(i) * rows * cols_n;
      if (need_w) MapMat(pgrad(self, 1).data(), g.o, R).noalias() += gi * CMapMat(ci, R, C).transpose();
      if (need_x) {
        MapMat(dcols.data(), R, C).noalias() = wmat.transpose() * gi;
        col2im_add(dcols.data(), g, pgrad(self, 0).data() + static_cast<std::size_t>(i) * g.c * g.h * g.w);
      }
    }
    if (has_bias && wants(self, 2)) {
      Tensor& gb = pgrad(self, 2);
      for (int i = 0; i < g.n; ++i)
        for (int oc = 0; oc < g.o; ++oc) {
          const float* src = self.grad.data() + (static_cast<std::size_t>(i) * g.o + oc) * cols_n;
          double acc = 0.0;
          for (std::size_t k = 0; k < cols_n; ++k) acc += src[k];
          gb[oc] += static_cast<float>(acc);
        }
    }
  });
}

Var upsample_nearest2x(const Var& x) {
  require_ndim(x, 4, "upsample_nearest2x");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  Tensor out({n, c, 2 * h, 2 * w});
  for (int p = 0; p < n * c; ++p) {
    const float* src = x.value().data() + static_cast<std::size_t>(p) * h * w;
    float* dst = out.data() + static_cast<std::size_t>(p) * 4 * h * w;
    for (int i = 0; i < 2 * h; ++i)
      for (int j = 0; j < 2 * w; ++j) dst[static_cast<std::size_t>(i) * 2 * w + j] = src[(i / 2) * w + j / 2];
  }
  return make_result(std::move(out), {x}, [n, c, h, w](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    for (int p = 0; p < n * c; ++p) {
      const float* src = self.grad.data() + static_cast<std::size_t>(p) * 4 * h * w;
      float* dst = g.data() + static_cast<std::size_t>(p) * h * w;
      for (int i = 0; i < 2 * h; ++i)
        for (int j = 0; j < 2 * w; ++j) dst[(i / 2) * w + j / 2] += src[static_cast<std::size_t>(i) * 2 * w + j];
    }
  });
}

namespace {

struct LerpIndex {
  int i0, i1;
  float frac;
};

std::vector<LerpIndex> lerp_table(int in, int out) {
  std::vector<LerpIndex> t(out);
  const double ratio = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    double src = (o + 0.5) * ratio - 0.5;
    if (src < 0.0) src = 0.0;
    int i0 = static_cast<int>(std::floor(src));
    if (i0 > in - 1) i0 = in - 1;
    const int i1 = std::min(i0 + 1, in - 1);
    t[o] = {i0, i1, static_cast<float>(src - i0)};
  }
  return t;
}

}  // namespace

Var resize_bilinear(const Var& x, int height, int width) {
  require_ndim(x, 4, "resize_bilinear");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h == height && w == width) return x;
  const auto ty = lerp_table(h, height), tx = lerp_table(w, width);
  Tensor out({n, c, height, width});
  for (int p = 0; p < n * c; ++p) {
    const float* src = x.value().data() + static_cast<std::size_t>(p) * h * w;
    float* dst = out.data() + static_cast<std::size_t>(p) * height * width;
    for (int i = 0; i < height; ++i) {
      const auto& a = ty[i];
      for (int j = 0; j < width; ++j) {
        const auto& b = tx[j];
        const float top = src[a.i0 * w + b.i0] * (1.0f - b.frac) + src[a.i0 * w + b.i1] * b.frac;
        const float bot = src[a.i1 * w + b.i0] * (1.0f - b.frac) + src[a.i1 * w + b.i1] * b.frac;
        dst[static_cast<std::size_t>(i) * width + j] = top * (1.0f - a.frac) + bot * a.frac;
      }
    }
  }
  return make_result(std::move(out), {x}, [n, c, h, w, height, width, ty, tx](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    for (int p = 0; p < n * c; ++p) {
      const float* src = self.grad.data() + static_cast<std::size_t>(p) * height * width;
      float* dst = g.data() + static_cast<std::size_t>(p) * h * w;
      for (int i = 0; i < height; ++i) {
        const auto& a = ty[i];
        for (int j = 0; j < width; ++j) {
          const auto& b = tx[j];
          const float gv = src[static_cast<std::size_t>(i) * width + j];
          dst[a.i0 * w + b.i0] += gv * (1.0f - a.frac) * (1.0f - b.frac);
          dst[a.i0 * w + b.i1] += gv * (1.0f - a.frac) * b.frac;
          dst[a.i1 * w + b.i0] += gv * a.frac * (1.0f - b.frac);
          dst[a.i1 * w + b.i1] += gv * a.frac * b.frac;
        }
      }
    }
  });
}

Var avg_pool2x(const Var& x) {
  require_ndim(x, 4, "avg_pool2x");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2) / 2, w = x.dim(3) / 2;
  const int iw = x.dim(3);
  if (h == 0 || w == 0) throw ContractError("avg_pool2x: input too small");
  Tensor out({n, c, h, w});
  const int ih = x.dim(2);
  for (int p = 0; p < n * c; ++p) {
    const float* src = x.value().data() + static_cast<std::size_t>(p) * ih * iw;
    float* dst = out.data() + static_cast<std::size_t>(p) * h * w;
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        dst[i * w + j] = 0.25f * (src[2 * i * iw + 2 * j] + src[2 * i * iw + 2 * j + 1] +
                                  src[(2 * i + 1) * iw + 2 * j] + src[(2 * i + 1) * iw + 2 * j + 1]);
  }
  return make_result(std::move(out), {x}, [n, c, h, w, ih, iw](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    for (int p = 0; p < n * c; ++p) {
      const float* src = self.grad.data() + static_cast<std::size_t>(p) * h * w;
      float* dst = g.data() + static_cast<std::size_t>(p) * ih * iw;
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
          const float v = 0.25f * src[i * w + j];
          dst[2 * i * iw + 2 * j] += v;
          dst[2 * i * iw + 2 * j + 1] += v;
          dst[(2 * i + 1) * iw + 2 * j] += v;
          dst[(2 * i + 1) * iw + 2 * j + 1] += v;
        }
    }
  });
}

Var max_pool2x(const Var& x) {
  require_ndim(x, 4, "max_pool2x");
  const int n = x.dim(0), c = x.dim(1), ih = x.dim(2), iw = x.dim(3), h = ih / 2, w = iw / 2;
  if (h == 0 || w == 0) throw ContractError("max_pool2x: input too small");
  Tensor out({n, c, h, w});
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.numel());
  for (int p = 0; p < n * c; ++p) {
    const std::size_t base = static_cast<std::size_t>(p) * ih * iw;
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        std::size_t best = base + 2 * i * iw + 2 * j;
        for (std::size_t cand : {best + 1, best + iw, best + iw + 1})
          if (x.value()[cand] > x.value()[best]) best = cand;
        const std::size_t o = static_cast<std::size_t>(p) * h * w + i * w + j;
        out[o] = x.value()[best];
        (*argmax)[o] = best;
      }
  }
  return make_result(std::move(out), {x}, [argmax](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    for (std::size_t o = 0; o < argmax->size(); ++o) g[(*argmax)[o]] += self.grad[o];
  });
}

Var channel_mean(const Var& x) {
  require_ndim(x, 4, "channel_mean");
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  Tensor out({n, c});
  for (int p = 0; p < n * c; ++p) {
    const float* src = x.value().data() + p * hw;
    double acc = 0.0;
    for (std::size_t k = 0; k < hw; ++k) acc += src[k];
    out[p] = static_cast<float>(acc / static_cast<double>(hw));
  }
  return make_result(std::move(out), {x}, [n, c, hw](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    for (int p = 0; p < n * c; ++p) {
      const float v = self.grad[p] / static_cast<float>(hw);
      float* dst = g.data() + p * hw;
      for (std::size_t k = 0; k < hw; ++k) dst[k] += v;
    }
  });
}

Var channel_std(const Var& x, float eps) {
  require_ndim(x, 4, "channel_std");
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  Tensor out({n, c});
  auto means = std::make_shared<Storage>(static_cast<std::size_t>(n) * c);
  for (int p = 0; p < n * c; ++p) {
    const float* src = x.value().data() + p * hw;
    double mu = 0.0;
    for (std::size_t k = 0; k < hw; ++k) mu += src[k];
    mu /= static_cast<double>(hw);
    double var = 0.0;
    for (std::size_t k = 0; k < hw; ++k) var += (src[k] - mu) * (src[k] - mu);
    var /= static_cast<double>(hw);
    (*means)[p] = static_cast<float>(mu);
    out[p] = static_cast<float>(std::sqrt(var + eps));
  }
  return make_result(std::move(out), {x}, [n, c, hw, means](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    const Tensor& xv = pval(self, 0);
    for (int p = 0; p < n * c; ++p) {
      const float k = self.grad[p] / (static_cast<float>(hw) * self.value[p]);
      const float mu = (*means)[p];
      for (std::size_t i = 0; i < hw; ++i) g[p * hw + i] += k * (xv[p * hw + i] - mu);
    }
  });
}

Var instance_normalize(const Var& x, float eps) {
  require_ndim(x, 4, "instance_normalize");
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  Tensor out(x.shape());
  auto inv_std = std::make_shared<Storage>(static_cast<std::size_t>(n) * c);
  for (int p = 0; p < n * c; ++p) {
    const float* src = x.value().data() + p * hw;
    double mu = 0.0;
    for (std::size_t k = 0; k < hw; ++k) mu += src[k];
    mu /= static_cast<double>(hw);
    double var = 0.0;
    for (std::size_t k = 0; k < hw; ++k) var += (src[k] - mu) * (src[k] - mu);
    var /= static_cast<double>(hw);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[p] = static_cast<float>(is);
    for (std::size_t k = 0; k < hw; ++k) out[p * hw + k] = static_cast<float>((src[k] - mu) * is);
  }
  return make_result(std::move(out), {x}, [n, c, hw, inv_std](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    for (int p = 0; p < n * c; ++p) {
      const float* gy = self.grad.data() + p * hw;
      const float* y = self.value.data() + p * hw;
      double mg = 0.0, mgy = 0.0;
      for (std::size_t k = 0; k < hw; ++k) {
        mg += gy[k];
        mgy += static_cast<double>(gy[k]) * y[k];
      }
      mg /= static_cast<double>(hw);
      mgy /= static_cast<double>(hw);
      const float is = (*inv_std)[p];
      for (std::size_t k = 0; k < hw; ++k)
        g[p * hw + k] += is * (gy[k] - static_cast<float>(mg) - y[k] * static_cast<float>(mgy));
    }
  });
}

Var scale_shift_channels(const Var& x, const Var& scale_v, const Var& shift_v) {
  require_ndim(x, 4, "scale_shift_channels");
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  if (scale_v.shape() != Shape{n, c} || shift_v.shape() != Shape{n, c}) {
    throw ContractError("scale_shift_channels: modulation must be [N, C]");
  }
  Tensor out(x.shape());
  for (int p = 0; p < n * c; ++p) {
    const float s = scale_v.value()[p], t = shift_v.value()[p];
    for (std::size_t k = 0; k < hw; ++k) out[p * hw + k] = x.value()[p * hw + k] * s + t;
  }
  return make_result(std::move(out), {x, scale_v, shift_v}, [n, c, hw](Node& self) {
    const Tensor& xv = pval(self, 0);
    const Tensor& sv = pval(self, 1);
    for (int p = 0; p < n * c; ++p) {
      const float* gy = self.grad.data() + p * hw;
      if (wants(self, 0)) {
        float* gx = pgrad(self, 0).data() + p * hw;
        for (std::size_t k = 0; k < hw; ++k) gx[k] += gy[k] * sv[p];
      }
      if (wants(self, 1)) {
        double acc = 0.0;
        for (std::size_t k = 0; k < hw; ++k) acc += static_cast<double>(gy[k]) * xv[p * hw + k];
        pgrad(self, 1)[p] += static_cast<float>(acc);
      }
      if (wants(self, 2)) {
        double acc = 0.0;
        for (std::size_t k = 0; k < hw; ++k) acc += gy[k];
        pgrad(self, 2)[p] += static_cast<float>(acc);
      }
    }
  });
}

Var mul_channels(const Var& x, const Var& gate) {
  require_ndim(x, 4, "mul_channels");
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  if (gate.shape() != Shape{n, 1, x.dim(2), x.dim(3)}) {
    throw ContractError("mul_channels: gate must be [N, 1, H, W], got " + shape_string(gate.shape()));
  }
  Tensor out(x.shape());
  for (int b = 0; b < n; ++b) {
    const float* g = gate.value().data() + b * hw;
    for (int ch = 0; ch < c; ++ch) {
      const std::size_t off = (static_cast<std::size_t>(b) * c + ch) * hw;
      for (std::size_t k = 0; k < hw; ++k) out[off + k] = x.value()[off + k] * g[k];
    }
  }
  return make_result(std::move(out), {x, gate}, [n, c, hw](Node& self) {
    const Tensor& xv = pval(self, 0);
    const Tensor& gv = pval(self, 1);
    for (int b = 0; b < n; ++b) {
      for (int ch = 0; ch < c; ++ch) {
        const std::size_t off = (static_cast<std::size_t>(b) * c + ch) * hw;
        const float* gy = self.grad.data() + off;
        if (wants(self, 0)) {
          float* gx = pgrad(self, 0).data() + off;
          for (std::size_t k = 0; k < hw; ++k) gx[k] += gy[k] * gv[b * hw + k];
        }
        if (wants(self, 1)) {
          float* gg = pgrad(self, 1).data() + b * hw;
          for (std::size_t k = 0; k < hw; ++k) gg[k] += gy[k] * xv[off + k];
        }
      }
    }
  });
}

namespace {

struct Sample {
  int x0, x1, y0, y1;
  float ax, ay;
  bool clamp_x, clamp_y;
};

inline Sample locate(float px, float py, int w, int h) {
  Sample s{};
  s.clamp_x = px <= 0.0f || px >= static_cast<float>(w - 1);
  s.clamp_y = py <= 0.0f || py >= static_cast<float>(h - 1);
  px = std::clamp(px, 0.0f, static_cast<float>(w - 1));
  py = std::clamp(py, 0.0f, static_cast<float>(h - 1));
  s.x0 = static_cast<int>(std::floor(px));
  s.y0 = static_cast<int>(std::floor(py));
  s.x1 = std::min(s.x0 + 1, w - 1);
  s.y1 = std::min(s.y0 + 1, h - 1);
  s.ax = px - static_cast<float>(s.x0);
  s.ay = py - static_cast<float>(s.y0);
  return s;
}

}  // namespace

Var grid_warp(const Var& x, const Var& flow) {
  require_ndim(x, 4, "grid_warp");
  require_ndim(flow, 4, "grid_warp");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (flow.dim(0) != n || flow.dim(1) != 2 || flow.dim(2) != h || flow.dim(3) != w) {
    throw ContractError("grid_warp: flow " + shape_string(flow.shape()) + " does not match input " +
                        shape_string(x.shape()));
  }
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  const float sx = 0.5f * static_cast<float>(w), sy = 0.5f * static_cast<float>(h);
  Tensor out(x.shape());
  for (int b = 0; b < n; ++b) {
    const float* fx = flow.value().data() + static_cast<std::size_t>(b) * 2 * hw;
    const float* fy = fx + hw;
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        const std::size_t pix = static_cast<std::size_t>(i) * w + j;
        const Sample s = locate(static_cast<float>(j) + fx[pix] * sx, static_cast<float>(i) + fy[pix] * sy, w, h);
        for (int ch = 0; ch < c; ++ch) {
          const float* src = x.value().data() + (static_cast<std::size_t>(b) * c + ch) * hw;
          const float top = (1.0f - s.ax) * src[s.y0 * w + s.x0] + s.ax * src[s.y0 * w + s.x1];
          const float bot = (1.0f - s.ax) * src[s.y1 * w + s.x0] + s.ax * src[s.y1 * w + s.x1];
          out[(static_cast<std::size_t>(b) * c + ch) * hw + pix] = (1.0f - s.ay) * top + s.ay * bot;
        }
      }
  }
  return make_result(std::move(out), {x, flow}, [n, c, h, w, hw, sx, sy](Node& self) {
    const bool need_x = wants(self, 0), need_f = wants(self, 1);
    const Tensor& xv = pval(self, 0);
    const Tensor& fv = pval(self, 1);
    for (int b = 0; b < n; ++b) {
      const float* fx = fv.data() + static_cast<std::size_t>(b) * 2 * hw;
      const float* fy = fx + hw;
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
          const std::size_t pix = static_cast<std::size_t>(i) * w + j;
          const Sample s = locate(static_cast<float>(j) + fx[pix] * sx, static_cast<float>(i) + fy[pix] * sy, w, h);
          double dfx = 0.0, dfy = 0.0;
          for (int ch = 0; ch < c; ++ch) {
            const std::size_t plane = (static_cast<std::size_t>(b) * c + ch) * hw;
            const float g = self.grad[plane + pix];
            if (g == 0.0f) continue;
            if (need_x) {
              float* gx = pgrad(self, 0).data() + plane;
              gx[s.y0 * w + s.x0] += g * (1.0f - s.ax) * (1.0f - s.ay);
              gx[s.y0 * w + s.x1] += g * s.ax * (1.0f - s.ay);
              gx[s.y1 * w + s.x0] += g * (1.0f - s.ax) * s.ay;
              gx[s.y1 * w + s.x1] += g * s.ax * s.ay;
            }
            if (need_f) {
              const float* src = xv.data() + plane;
              const float v00 = src[s.y0 * w + s.x0], v01 = src[s.y0 * w + s.x1];
              const float v10 = src[s.y1 * w + s.x0], v11 = src[s.y1 * w + s.x1];
              if (!s.clamp_x) dfx += g * ((1.0f - s.ay) * (v01 - v00) + s.ay * (v11 - v10));
              if (!s.clamp_y) dfy += g * ((1.0f - s.ax) * (v10 - v00) + s.ax * (v11 - v01));
            }
          }
          if (need_f) {
            Tensor& gf = pgrad(self, 1);
            gf[static_cast<std::size_t>(b) * 2 * hw + pix] += static_cast<float>(dfx) * sx;
            gf[static_cast<std::size_t>(b) * 2 * hw + hw + pix] += static_cast<float>(dfy) * sy;
          }
        }
    }
  });
}

Var sum(const Var& x) {
  double acc = 0.0;
  for (float v : x.value().values()) acc += v;
  return make_result(Tensor::scalar(static_cast<float>(acc)), {x}, [](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    const float gv = self.grad[0];
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += gv;
  });
}

Var mean(const Var& x) {
  const auto n = static_cast<double>(x.value().numel());
  double acc = 0.0;
  for (float v : x.value().values()) acc += v;
  return make_result(Tensor::scalar(static_cast<float>(acc / n)), {x}, [n](Node& self) {
    if (!wants(self, 0)) return;
    Tensor& g = pgrad(self, 0);
    const float gv = static_cast<float>(self.grad[0] / n);
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += gv;
  });
}

Var l1_loss(const Var& a, const Var& b) {
  require_same_shape(a, b, "l1_loss");
  const auto n = static_cast<double>(a.value().numel());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.value().numel(); ++i) acc += std::fabs(a.value()[i] - b.value()[i]);
  return make_result(Tensor::scalar(static_cast<float>(acc / n)), {a, b}, [n](Node& self) {
    const Tensor& av = pval(self, 0);
    const Tensor& bv = pval(self, 1);
    const float gv = static_cast<float>(self.grad[0] / n);
    for (std::size_t p = 0; p < 2; ++p) {
      if (!wants(self, p)) continue;
      Tensor& g = pgrad(self, p);
      const float sign = p == 0 ? 1.0f : -1.0f;
      for (std::size_t i = 0; i < g.numel(); ++i) {
        const float d = av[i] - bv[i];
        if (d > 0.0f)
          g[i] += sign * gv;
        else if (d < 0.0f)
          g[i] -= sign * gv;
      }
    }
  });
}

Var mse_loss(const Var& a, const Var& b) {
  require_same_shape(a, b, "mse_loss");
  const auto n = static_cast<double>(a.value().numel());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.value().numel(); ++i) {
    const double d = static_cast<double>(a.value()[i]) - b.value()[i];
    acc += d * d;
  }
  return make_result(Tensor::scalar(static_cast<float>(acc / n)), {a, b}, [n](Node& self) {
    const Tensor& av = pval(self, 0);
    const Tensor& bv = pval(self, 1);
    const float k = static_cast<float>(2.0 * self.grad[0] / n);
    for (std::size_t p = 0; p < 2; ++p) {
      if (!wants(self, p)) continue;
      Tensor& g = pgrad(self, p);
      const float sign = p == 0 ? 1.0f : -1.0f;
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += sign * k * (av[i] - bv[i]);
    }
  });
}

Var lstm(const Var& x, const Var& w_ih, const Var& w_hh, const Var& bias) {
  require_ndim(x, 3, "lstm");
  const int steps = x.dim(0), batch = x.dim(1), in = x.dim(2);
  const int hidden = w_hh.dim(0);
  if (w_ih.shape() != Shape{in, 4 * hidden} || w_hh.shape() != Shape{hidden, 4 * hidden} ||
      bias.value().numel() != static_cast<std::size_t>(4 * hidden)) {
    throw ContractError("lstm: weight shapes inconsistent with input " + shape_string(x.shape()));
  }
  const int g4 = 4 * hidden;
  const Eigen::Index tb = static_cast<Eigen::Index>(steps) * batch;

  // Pre-activations for every step in one GEMM; recurrent term added per step.
  auto z = std::make_shared<Storage>(static_cast<std::size_t>(tb) * g4);
  MapMat zm(z->data(), tb, g4);
  zm.noalias() = CMapMat(x.value().data(), tb, in) * CMapMat(w_ih.value().data(), in, g4);
  zm.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(bias.value().data(), g4);

  // Saved activations: gates (post-nonlinearity) and cell states.
  auto cells = std::make_shared<Storage>(static_cast<std::size_t>(tb) * hidden);
  Tensor out({steps, batch, hidden});
  CMapMat whh(w_hh.value().data(), hidden, g4);
  RowMat h_prev = RowMat::Zero(batch, hidden);
  RowMat c_prev = RowMat::Zero(batch, hidden);
  for (int t = 0; t < steps; ++t) {
    MapMat zt(z->data() + static_cast<std::size_t>(t) * batch * g4, batch, g4);
    zt.noalias() += h_prev * whh;
    MapMat ct(cells->data() + static_cast<std::size_t>(t) * batch * hidden, batch, hidden);
    MapMat ht(out.data() + static_cast<std::size_t>(t) * batch * hidden, batch, hidden);
    for (int b = 0; b < batch; ++b)
      for (int k = 0; k < hidden; ++k) {
        float& zi = zt(b, k);
        float& zf = zt(b, hidden + k);
        float& zg = zt(b, 2 * hidden + k);
        float& zo = zt(b, 3 * hidden + k);
        zi = 1.0f / (1.0f + std::exp(-zi));
        zf = 1.0f / (1.0f + std::exp(-zf));
        zg = std::tanh(zg);
        zo = 1.0f / (1.0f + std::exp(-zo));
        const float c = zf * c_prev(b, k) + zi * zg;
        ct(b, k) = c;
        ht(b, k) = zo * std::tanh(c);
      }
    h_prev = ht;
    c_prev = ct;
  }

  return make_result(std::move(out), {x, w_ih, w_hh, bias},
                     [steps, batch, in, hidden, g4, tb, z, cells](Node& self) {
    RowMat dz(tb, g4);
    RowMat dh_next = RowMat::Zero(batch, hidden);
    RowMat dc_next = RowMat::Zero(batch, hidden);
    CMapMat whh(pval(self, 2).data(), hidden, g4);
    CMapMat gates(z->data(), tb, g4);
    CMapMat cs(cells->data(), tb, hidden);
    for (int t = steps - 1; t >= 0; --t) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(t) * batch;
      for (int b = 0; b < batch; ++b) {
        const Eigen::Index r = r0 + b;
        for (int k = 0; k < hidden; ++k) {
          const float i = gates(r, k), f = gates(r, hidden + k), g = gates(r, 2 * hidden + k),
                      o = gates(r, 3 * hidden + k);
          const float c = cs(r, k);
          const float c_prev = t > 0 ? cs(r - batch, k) : 0.0f;
          const float tc = std::tanh(c);
          const float dh = self.grad[static_cast<std::size_t>(r) * hidden + k] + dh_next(b, k);
          const float dc = dh * o * (1.0f - tc * tc) + dc_next(b, k);
          dz(r, k) = dc * g * i * (1.0f - i);
          dz(r, hidden + k) = dc * c_prev * f * (1.0f - f);
          dz(r, 2 * hidden + k) = dc * i * (1.0f - g * g);
          dz(r, 3 * hidden + k) = dh * tc * o * (1.0f - o);
          dc_next(b, k) = dc * f;
        }
      }
      dh_next.noalias() = dz.middleRows(r0, batch) * whh.transpose();
    }
    if (wants(self, 0)) {
      MapMat(pgrad(self, 0).data(), tb, in).noalias() += dz * CMapMat(pval(self, 1).data(), in, g4).transpose();
    }
    if (wants(self, 1)) {
      MapMat(pgrad(self, 1).data(), in, g4).noalias() += CMapMat(pval(self, 0).data(), tb, in).transpose() * dz;
    }
    if (wants(self, 2) && steps > 1) {
      // h_{t-1} for t >= 1 are the layer outputs shifted by one step.
      const Eigen::Index rows = static_cast<Eigen::Index>(steps - 1) * batch;
      MapMat(pgrad(self, 2).data(), hidden, g4).noalias() +=
          CMapMat(self.value.data(), rows, hidden).transpose() * dz.bottomRows(rows);
    }
    if (wants(self, 3)) {
      Eigen::Map<Eigen::RowVectorXf>(pgrad(self, 3).data(), g4) += dz.colwise().sum();
    }
  });
}

}  // namespace emoface::nn
