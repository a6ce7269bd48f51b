/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <opencv2/core.hpp>

#include "fasterx/cost.hpp"

namespace fasterx::ops {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void require_rank4(const Tensor& x, const char* op) {
  require(x.defined() && x.rank() == 4,
          std::string(op) + ": expected NCHW tensor, got " +
              (x.defined() ? shape_str(x.shape()) : "undefined"));
}

double sigmoid_scalar(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

// out[i] = sigmoid(in[i]) using OpenCV's vectorised exp; in and out may alias.
void sigmoid_array(const double* in, double* out, size_t n) {
  if (n == 0) return;
  for (size_t i = 0; i < n; ++i) out[i] = -in[i];
  cv::Mat m(1, static_cast<int>(n), CV_64F, out);
  cv::exp(m, m);
  for (size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + out[i]);
}

template <class F>
Tensor unary(const Tensor& x, int64_t cost_units, F&& forward_fn) {
  record_cost(0, cost_units);
  Tensor out = make_result(x.shape(), {x});
  if (out.is_meta()) return out;
  auto in = x.data();
  auto o = out.data();
  for (size_t i = 0; i < o.size(); ++i) o[i] = forward_fn(in[i]);
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "add: shape mismatch " + shape_str(a.shape()) + " vs " +
                                      shape_str(b.shape()));
  Tensor out = make_result(a.shape(), {a, b});
  if (out.is_meta()) return out;
  auto o = out.data();
  auto da = a.data();
  auto db = b.data();
  for (size_t i = 0; i < o.size(); ++i) o[i] = da[i] + db[i];
  attach_backward(out, {a, b}, [a, b](const TensorImpl& r) mutable {
    for (const Tensor* t : {&a, &b}) {
      if (!t->requires_grad()) continue;
      auto g = t->mutable_grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += r.grad[i];
    }
  });
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scale(b, -1.0)); }

Tensor mul(const Tensor& a, const Tensor& b) {
  require(a.rank() == b.rank(), "mul: rank mismatch");
  const int r = a.rank();
  std::vector<int64_t> bstride(r, 0);
  int64_t s = 1;
  for (int d = r - 1; d >= 0; --d) {
    require(b.dim(d) == a.dim(d) || b.dim(d) == 1,
            "mul: cannot broadcast " + shape_str(b.shape()) + " onto " + shape_str(a.shape()));
    bstride[d] = b.dim(d) == 1 ? 0 : s;
    s *= b.dim(d);
  }
  Tensor out = make_result(a.shape(), {a, b});
  if (out.is_meta()) return out;

  // Maps each flat index of `a` to the broadcast index of `b`.
  const int64_t n = a.numel();
  std::vector<int64_t> bidx(static_cast<size_t>(n));
  {
    std::vector<int> coord(r, 0);
    int64_t off = 0;
    for (int64_t i = 0; i < n; ++i) {
      bidx[i] = off;
      for (int d = r - 1; d >= 0; --d) {
        ++coord[d];
        off += bstride[d];
        if (coord[d] < a.dim(d)) break;
        off -= bstride[d] * coord[d];
        coord[d] = 0;
      }
    }
  }
  auto o = out.data();
  auto da = a.data();
  auto db = b.data();
  for (int64_t i = 0; i < n; ++i) o[i] = da[i] * db[bidx[i]];
  attach_backward(out, {a, b}, [a, b, bidx = std::move(bidx)](const TensorImpl& res) mutable {
    const auto& g = res.grad;
    if (a.requires_grad()) {
      auto ga = a.mutable_grad();
      auto vb = b.data();
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[bidx[i]];
    }
    if (b.requires_grad()) {
      auto gb = b.mutable_grad();
      auto va = a.data();
      for (size_t i = 0; i < g.size(); ++i) gb[bidx[i]] += g[i] * va[i];
    }
  });
  return out;
}

Tensor scale(const Tensor& x, double factor) {
  Tensor out = make_result(x.shape(), {x});
  if (out.is_meta()) return out;
  auto o = out.data();
  auto in = x.data();
  for (size_t i = 0; i < o.size(); ++i) o[i] = in[i] * factor;
  attach_backward(out, {x}, [x, factor](const TensorImpl& r) mutable {
    auto g = x.mutable_grad();
    for (size_t i = 0; i < g.size(); ++i) g[i] += r.grad[i] * factor;
  });
  return out;
}

Tensor sigmoid(const Tensor& x) {
  record_cost(0, x.numel());
  Tensor out = make_result(x.shape(), {x});
  if (out.is_meta()) return out;
  sigmoid_array(x.data().data(), out.data().data(), x.numel());
  attach_backward(out, {x}, [x](const TensorImpl& r) mutable {
    auto g = x.mutable_grad();
    for (size_t i = 0; i < g.size(); ++i) g[i] += r.grad[i] * r.data[i] * (1.0 - r.data[i]);
  });
  return out;
}

Tensor silu(const Tensor& x) {
  Tensor out = unary(x, x.numel(), [](double v) { return v * sigmoid_scalar(v); });
  if (out.is_meta()) return out;
  attach_backward(out, {x}, [x](const TensorImpl& r) mutable {
    auto g = x.mutable_grad();
    auto in = x.data();
    for (size_t i = 0; i < g.size(); ++i) {
      const double s = sigmoid_scalar(in[i]);
      g[i] += r.grad[i] * s * (1.0 + in[i] * (1.0 - s));
    }
  });
  return out;
}

Tensor sum(const Tensor& x) {
  Tensor out = make_result({}, {x});
  if (out.is_meta()) return out;
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  out.data()[0] = acc;
  attach_backward(out, {x}, [x](const TensorImpl& r) mutable {
    auto g = x.mutable_grad();
    for (auto& v : g) v += r.grad[0];
  });
  return out;
}

Tensor mean(const Tensor& x) {
  require(x.numel() > 0, "mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor mse(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "mse: shape mismatch " + shape_str(a.shape()) + " vs " +
                                      shape_str(b.shape()));
  require(a.numel() > 0, "mse: empty tensors");
  Tensor out = make_result({}, {a, b});
  if (out.is_meta()) return out;
  const auto da = a.data();
  const auto db = b.data();
  const double inv_n = 1.0 / static_cast<double>(a.numel());
  double acc = 0.0;
  for (size_t i = 0; i < da.size(); ++i) acc += (da[i] - db[i]) * (da[i] - db[i]);
  out.data()[0] = acc * inv_n;
  attach_backward(out, {a, b}, [a, b, inv_n](const TensorImpl& r) mutable {
    const double k = 2.0 * inv_n * r.grad[0];
    const auto va = a.data();
    const auto vb = b.data();
    if (a.requires_grad()) {
      auto g = a.mutable_grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += k * (va[i] - vb[i]);
    }
    if (b.requires_grad()) {
      auto g = b.mutable_grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] -= k * (va[i] - vb[i]);
    }
  });
  return out;
}

// --- convolution ------------------------------------------------------------

namespace {

struct ConvGeom {
  int n, c, h, w;       // input
  int cout, cin_g, k;   // weight
  int stride, pad, groups;
  int ho, wo;
  int cout_g() const { return cout / groups; }
  int64_t col_rows() const { return static_cast<int64_t>(cin_g) * k * k; }
  int64_t out_plane() const { return static_cast<int64_t>(ho) * wo; }
  bool pointwise() const { return k == 1 && stride == 1 && pad == 0; }
};

// Output positions ox in [lo, hi) whose input column ox*s - p + kx is in [0, w).
inline void valid_range(int w, int wo, int s, int p, int kx, int& lo, int& hi) {
  const int off = p - kx;
  lo = off <= 0 ? 0 : (off + s - 1) / s;
  const int top = w - 1 + off;
  hi = top < 0 ? 0 : std::min(wo, top / s + 1);
  if (lo > hi) lo = hi;
}

void im2col(const double* x, const ConvGeom& g, double* col) {
  const int64_t plane = g.out_plane();
  for (int c = 0; c < g.cin_g; ++c) {
    const double* xp = x + static_cast<int64_t>(c) * g.h * g.w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        double* row = col + ((static_cast<int64_t>(c) * g.k + ky) * g.k + kx) * plane;
        int lo, hi;
        valid_range(g.w, g.wo, g.stride, g.pad, kx, lo, hi);
        for (int oy = 0; oy < g.ho; ++oy) {
          double* r = row + static_cast<int64_t>(oy) * g.wo;
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) {
            std::fill(r, r + g.wo, 0.0);
            continue;
          }
          std::fill(r, r + lo, 0.0);
          const double* src = xp + static_cast<int64_t>(iy) * g.w - g.pad + kx;
          if (g.stride == 1) {
            for (int ox = lo; ox < hi; ++ox) r[ox] = src[ox];
          } else {
            for (int ox = lo; ox < hi; ++ox) r[ox] = src[ox * g.stride];
          }
          std::fill(r + hi, r + g.wo, 0.0);
        }
      }
    }
  }
}

void col2im_add(const double* col, const ConvGeom& g, double* dx) {
  const int64_t plane = g.out_plane();
  for (int c = 0; c < g.cin_g; ++c) {
    double* xp = dx + static_cast<int64_t>(c) * g.h * g.w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const double* row = col + ((static_cast<int64_t>(c) * g.k + ky) * g.k + kx) * plane;
        int lo, hi;
        valid_range(g.w, g.wo, g.stride, g.pad, kx, lo, hi);
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          const double* r = row + static_cast<int64_t>(oy) * g.wo;
          double* dst = xp + static_cast<int64_t>(iy) * g.w - g.pad + kx;
          for (int ox = lo; ox < hi; ++ox) dst[ox * g.stride] += r[ox];
        }
      }
    }
  }
}

// Depthwise (one input channel per group) forward for a single output plane.
void depthwise_plane(const double* in, const double* wk, const ConvGeom& g, double* out) {
  for (int ky = 0; ky < g.k; ++ky) {
    for (int kx = 0; kx < g.k; ++kx) {
      const double wv = wk[ky * g.k + kx];
      int lo, hi;
      valid_range(g.w, g.wo, g.stride, g.pad, kx, lo, hi);
      for (int oy = 0; oy < g.ho; ++oy) {
        const int iy = oy * g.stride - g.pad + ky;
        if (iy < 0 || iy >= g.h) continue;
        double* o = out + static_cast<int64_t>(oy) * g.wo;
        const double* src = in + static_cast<int64_t>(iy) * g.w - g.pad + kx;
        if (g.stride == 1) {
          for (int ox = lo; ox < hi; ++ox) o[ox] += wv * src[ox];
        } else {
          for (int ox = lo; ox < hi; ++ox) o[ox] += wv * src[ox * g.stride];
        }
      }
    }
  }
}

void depthwise_plane_backward(const double* in, const double* wk, const double* gout,
                              const ConvGeom& g, double* din, double* dwk) {
  for (int ky = 0; ky < g.k; ++ky) {
    for (int kx = 0; kx < g.k; ++kx) {
      const double wv = wk[ky * g.k + kx];
      double wacc = 0.0;
      int lo, hi;
      valid_range(g.w, g.wo, g.stride, g.pad, kx, lo, hi);
      for (int oy = 0; oy < g.ho; ++oy) {
        const int iy = oy * g.stride - g.pad + ky;
        if (iy < 0 || iy >= g.h) continue;
        const double* go = gout + static_cast<int64_t>(oy) * g.wo;
        const int64_t base = static_cast<int64_t>(iy) * g.w - g.pad + kx;
        const double* src = in + base;
        if (dwk) {
          for (int ox = lo; ox < hi; ++ox) wacc += go[ox] * src[ox * g.stride];
        }
        if (din) {
          double* dst = din + base;
          for (int ox = lo; ox < hi; ++ox) dst[ox * g.stride] += wv * go[ox];
        }
      }
      if (dwk) dwk[ky * g.k + kx] += wacc;
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding,
              int groups) {
  require_rank4(x, "conv2d");
  require_rank4(weight, "conv2d weight");
  ConvGeom g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), weight.dim(0), weight.dim(1),
             weight.dim(2), stride, padding, groups, 0, 0};
  require(weight.dim(3) == g.k, "conv2d: only square kernels are supported");
  require(groups >= 1 && g.c == g.cin_g * groups,
          "conv2d: input has " + std::to_string(g.c) + " channels, weight expects " +
              std::to_string(g.cin_g) + " x " + std::to_string(groups) + " groups");
  require(g.cout % groups == 0, "conv2d: out channels not divisible by groups");
  require(stride >= 1 && padding >= 0, "conv2d: bad stride/padding");
  require(!bias.defined() || (bias.rank() == 1 && bias.dim(0) == g.cout), "conv2d: bias shape");
  g.ho = (g.h + 2 * padding - g.k) / stride + 1;
  g.wo = (g.w + 2 * padding - g.k) / stride + 1;
  require(g.ho > 0 && g.wo > 0, "conv2d: input smaller than kernel");

  record_cost(static_cast<int64_t>(g.n) * g.cout * g.out_plane() * g.col_rows(), 0);
  Tensor out = make_result({g.n, g.cout, g.ho, g.wo}, {x, weight, bias});
  if (out.is_meta()) return out;

  const int cout_g = g.cout_g();
  const int64_t plane = g.out_plane();
  const int64_t in_plane = static_cast<int64_t>(g.h) * g.w;
  const bool depthwise = g.cin_g == 1 && groups > 1;
  const double* xd = x.data().data();
  const double* wd = weight.data().data();
  double* od = out.data().data();

  std::vector<double> col;
  if (!depthwise && !g.pointwise()) col.resize(static_cast<size_t>(g.col_rows() * plane));
  for (int n = 0; n < g.n; ++n) {
    for (int gi = 0; gi < groups; ++gi) {
      const double* xin = xd + (static_cast<int64_t>(n) * g.c + gi * g.cin_g) * in_plane;
      double* o = od + (static_cast<int64_t>(n) * g.cout + gi * cout_g) * plane;
      const double* wg = wd + static_cast<int64_t>(gi) * cout_g * g.col_rows();
      if (depthwise) {
        for (int m = 0; m < cout_g; ++m) {
          depthwise_plane(xin, wg + static_cast<int64_t>(m) * g.k * g.k, g, o + m * plane);
        }
        continue;
      }
      const double* b = xin;
      if (!g.pointwise()) {
        im2col(xin, g, col.data());
        b = col.data();
      }
      gemm(false, false, cout_g, static_cast<int>(plane), static_cast<int>(g.col_rows()), 1.0,
           wg, static_cast<int>(g.col_rows()), b, static_cast<int>(plane), 0.0, o,
           static_cast<int>(plane));
    }
  }
  if (bias.defined()) {
    const auto bd = bias.data();
    for (int n = 0; n < g.n; ++n) {
      for (int c = 0; c < g.cout; ++c) {
        double* o = od + (static_cast<int64_t>(n) * g.cout + c) * plane;
        for (int64_t i = 0; i < plane; ++i) o[i] += bd[c];
      }
    }
  }

  attach_backward(out, {x, weight, bias}, [x, weight, bias, g](const TensorImpl& r) mutable {
    const int cout_g = g.cout_g();
    const int64_t plane = g.out_plane();
    const int64_t in_plane = static_cast<int64_t>(g.h) * g.w;
    const bool depthwise = g.cin_g == 1 && g.groups > 1;
    const double* gout = r.grad.data();
    const double* xd = x.data().data();
    const double* wd = weight.data().data();
    double* dx = x.requires_grad() ? x.mutable_grad().data() : nullptr;
    double* dw = weight.requires_grad() ? weight.mutable_grad().data() : nullptr;

    if (bias.defined() && bias.requires_grad()) {
      auto db = bias.mutable_grad();
      for (int n = 0; n < g.n; ++n) {
        for (int c = 0; c < g.cout; ++c) {
          const double* go = gout + (static_cast<int64_t>(n) * g.cout + c) * plane;
          double acc = 0.0;
          for (int64_t i = 0; i < plane; ++i) acc += go[i];
          db[c] += acc;
        }
      }
    }
    if (!dx && !dw) return;

    std::vector<double> col;
    if (!depthwise && !g.pointwise()) col.resize(static_cast<size_t>(g.col_rows() * plane));
    for (int n = 0; n < g.n; ++n) {
      for (int gi = 0; gi < g.groups; ++gi) {
        const int64_t xoff = (static_cast<int64_t>(n) * g.c + gi * g.cin_g) * in_plane;
        const double* xin = xd + xoff;
        const double* go = gout + (static_cast<int64_t>(n) * g.cout + gi * cout_g) * plane;
        const int64_t woff = static_cast<int64_t>(gi) * cout_g * g.col_rows();
        if (depthwise) {
          for (int m = 0; m < cout_g; ++m) {
            const int64_t wk = woff + static_cast<int64_t>(m) * g.k * g.k;
            depthwise_plane_backward(xin, wd + wk, go + m * plane, g, dx ? dx + xoff : nullptr,
                                     dw ? dw + wk : nullptr);
          }
          continue;
        }
        const int rows = static_cast<int>(g.col_rows());
        const int p = static_cast<int>(plane);
        if (g.pointwise()) {
          if (dw) gemm(false, true, cout_g, rows, p, 1.0, go, p, xin, p, 1.0, dw + woff, rows);
          if (dx) gemm(true, false, rows, p, cout_g, 1.0, wd + woff, rows, go, p, 1.0, dx + xoff, p);
          continue;
        }
        im2col(xin, g, col.data());
        if (dw) gemm(false, true, cout_g, rows, p, 1.0, go, p, col.data(), p, 1.0, dw + woff, rows);
        if (dx) {
          gemm(true, false, rows, p, cout_g, 1.0, wd + woff, rows, go, p, 0.0, col.data(), p);
          col2im_add(col.data(), g, dx + xoff);
        }
      }
    }
  });
  return out;
}

// --- normalization ----------------------------------------------------------

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor running_mean,
                  Tensor running_var, bool training, double momentum, double eps, bool fuse_silu) {
  require_rank4(x, "batch_norm");
  const int n = x.dim(0), c = x.dim(1);
  const int64_t plane = static_cast<int64_t>(x.dim(2)) * x.dim(3);
  require(gamma.numel() == c && beta.numel() == c && running_mean.numel() == c &&
              running_var.numel() == c,
          "batch_norm: parameter size does not match " + std::to_string(c) + " channels");
  record_cost(0, x.numel());
  if (fuse_silu) record_cost(0, x.numel());
  Tensor out = make_result(x.shape(), {x, gamma, beta});
  if (out.is_meta()) return out;

  const int64_t count = static_cast<int64_t>(n) * plane;
  std::vector<double> mu(c), inv_std(c);
  const auto xd = x.data();
  if (training) {
    require(count > 1, "batch_norm: training needs more than one value per channel");
    auto rm = running_mean.data();
    auto rv = running_var.data();
    for (int ch = 0; ch < c; ++ch) {
      double s = 0.0;
      for (int b = 0; b < n; ++b) {
        const double* p = xd.data() + (static_cast<int64_t>(b) * c + ch) * plane;
        for (int64_t i = 0; i < plane; ++i) s += p[i];
      }
      const double m = s / count;
      double v = 0.0;
      for (int b = 0; b < n; ++b) {
        const double* p = xd.data() + (static_cast<int64_t>(b) * c + ch) * plane;
        for (int64_t i = 0; i < plane; ++i) v += (p[i] - m) * (p[i] - m);
      }
      const double var = v / count;
      mu[ch] = m;
      inv_std[ch] = 1.0 / std::sqrt(var + eps);
      rm[ch] = (1.0 - momentum) * rm[ch] + momentum * m;
      rv[ch] = (1.0 - momentum) * rv[ch] + momentum * (v / (count - 1));
    }
  } else {
    const auto rm = running_mean.data();
    const auto rv = running_var.data();
    for (int ch = 0; ch < c; ++ch) {
      mu[ch] = rm[ch];
      inv_std[ch] = 1.0 / std::sqrt(rv[ch] + eps);
    }
  }

  auto o = out.data();
  const auto gd = gamma.data();
  const auto bd = beta.data();
  for (int b = 0; b < n; ++b) {
    for (int ch = 0; ch < c; ++ch) {
      const int64_t off = (static_cast<int64_t>(b) * c + ch) * plane;
      const double a = gd[ch] * inv_std[ch];
      const double k = bd[ch] - mu[ch] * a;
      for (int64_t i = 0; i < plane; ++i) o[off + i] = xd[off + i] * a + k;
    }
  }
  // d silu(y) / dy, kept so backward needs no exp.
  std::vector<double> act_grad;
  if (fuse_silu) {
    act_grad.resize(o.size());
    sigmoid_array(o.data(), act_grad.data(), o.size());
    for (size_t i = 0; i < o.size(); ++i) {
      const double y = o[i];
      const double sg = act_grad[i];
      o[i] = y * sg;
      act_grad[i] = sg * (1.0 + y * (1.0 - sg));
    }
  }

  attach_backward(out, {x, gamma, beta},
                  [x, gamma, beta, mu = std::move(mu), inv_std = std::move(inv_std), training, n,
                   c, plane, act_grad = std::move(act_grad)](const TensorImpl& r) mutable {
                    if (!act_grad.empty()) {
                      // Fold the activation into the upstream grad in place.
                      auto& up = const_cast<std::vector<double>&>(r.grad);
                      for (size_t i = 0; i < up.size(); ++i) up[i] *= act_grad[i];
                      std::vector<double>().swap(act_grad);
                    }
                    const auto xd = x.data();
                    const auto gd = gamma.data();
                    const double count = static_cast<double>(n) * plane;
                    for (int ch = 0; ch < c; ++ch) {
                      double sum_g = 0.0, sum_gx = 0.0;
                      for (int b = 0; b < n; ++b) {
                        const int64_t off = (static_cast<int64_t>(b) * c + ch) * plane;
                        for (int64_t i = 0; i < plane; ++i) {
                          const double gv = r.grad[off + i];
                          sum_g += gv;
                          sum_gx += gv * (xd[off + i] - mu[ch]) * inv_std[ch];
                        }
                      }
                      if (gamma.requires_grad()) gamma.mutable_grad()[ch] += sum_gx;
                      if (beta.requires_grad()) beta.mutable_grad()[ch] += sum_g;
                      if (!x.requires_grad()) continue;
                      auto dx = x.mutable_grad();
                      const double a = gd[ch] * inv_std[ch];
                      for (int b = 0; b < n; ++b) {
                        const int64_t off = (static_cast<int64_t>(b) * c + ch) * plane;
                        for (int64_t i = 0; i < plane; ++i) {
                          const double gv = r.grad[off + i];
                          if (training) {
                            const double xhat = (xd[off + i] - mu[ch]) * inv_std[ch];
                            dx[off + i] += a * (gv - sum_g / count - xhat * sum_gx / count);
                          } else {
                            dx[off + i] += a * gv;
                          }
                        }
                      }
                    }
                  });
  return out;
}

// --- structural ops ---------------------------------------------------------

Tensor concat_channels(const std::vector<Tensor>& xs) {
  require(!xs.empty(), "concat_channels: no inputs");
  int total = 0;
  for (const auto& t : xs) {
    require_rank4(t, "concat_channels");
    require(t.dim(0) == xs[0].dim(0) && t.dim(2) == xs[0].dim(2) && t.dim(3) == xs[0].dim(3),
            "concat_channels: mismatched " + shape_str(t.shape()) + " vs " +
                shape_str(xs[0].shape()));
    total += t.dim(1);
  }
  const int n = xs[0].dim(0);
  const int64_t plane = static_cast<int64_t>(xs[0].dim(2)) * xs[0].dim(3);
  Tensor out = make_result({n, total, xs[0].dim(2), xs[0].dim(3)}, xs);
  if (out.is_meta()) return out;
  auto o = out.data();
  int off = 0;
  for (const auto& t : xs) {
    const int ci = t.dim(1);
    const auto d = t.data();
    for (int b = 0; b < n; ++b) {
      std::copy(d.begin() + static_cast<int64_t>(b) * ci * plane,
                d.begin() + static_cast<int64_t>(b + 1) * ci * plane,
                o.begin() + (static_cast<int64_t>(b) * total + off) * plane);
    }
    off += ci;
  }
  attach_backward(out, xs, [xs, n, total, plane](const TensorImpl& r) mutable {
    int off = 0;
    for (auto& t : xs) {
      const int ci = t.dim(1);
      if (t.requires_grad()) {
        auto g = t.mutable_grad();
        for (int b = 0; b < n; ++b) {
          const double* src = r.grad.data() + (static_cast<int64_t>(b) * total + off) * plane;
          double* dst = g.data() + static_cast<int64_t>(b) * ci * plane;
          for (int64_t i = 0; i < ci * plane; ++i) dst[i] += src[i];
        }
      }
      off += ci;
    }
  });
  return out;
}

Tensor upsample_nearest(const Tensor& x, int factor) {
  require_rank4(x, "upsample_nearest");
  require(factor >= 1, "upsample_nearest: factor must be positive");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int ho = h * factor, wo = w * factor;
  Tensor out = make_result({n, c, ho, wo}, {x});
  if (out.is_meta()) return out;
  const auto in = x.data();
  auto o = out.data();
  for (int64_t p = 0; p < static_cast<int64_t>(n) * c; ++p) {
    for (int y = 0; y < ho; ++y) {
      for (int xx = 0; xx < wo; ++xx) {
        o[(p * ho + y) * wo + xx] = in[(p * h + y / factor) * w + xx / factor];
      }
    }
  }
  attach_backward(out, {x}, [x, n, c, h, w, factor](const TensorImpl& r) mutable {
    auto g = x.mutable_grad();
    const int ho = h * factor, wo = w * factor;
    for (int64_t p = 0; p < static_cast<int64_t>(n) * c; ++p) {
      for (int y = 0; y < ho; ++y) {
        for (int xx = 0; xx < wo; ++xx) {
          g[(p * h + y / factor) * w + xx / factor] += r.grad[(p * ho + y) * wo + xx];
        }
      }
    }
  });
  return out;
}

Tensor max_pool2d(const Tensor& x, int kernel) {
  require_rank4(x, "max_pool2d");
  require(kernel >= 1 && kernel % 2 == 1, "max_pool2d: kernel must be odd");
  record_cost(0, x.numel());
  Tensor out = make_result(x.shape(), {x});
  if (out.is_meta()) return out;
  const int h = x.dim(2), w = x.dim(3), pad = kernel / 2;
  const int64_t planes = static_cast<int64_t>(x.dim(0)) * x.dim(1);
  const auto in = x.data();
  auto o = out.data();
  std::vector<int> argmax(static_cast<size_t>(x.numel()));
  for (int64_t p = 0; p < planes; ++p) {
    const double* ip = in.data() + p * h * w;
    for (int y = 0; y < h; ++y) {
      for (int xx = 0; xx < w; ++xx) {
        double best = -std::numeric_limits<double>::infinity();
        int best_idx = y * w + xx;
        for (int yy = std::max(0, y - pad); yy <= std::min(h - 1, y + pad); ++yy) {
          for (int xq = std::max(0, xx - pad); xq <= std::min(w - 1, xx + pad); ++xq) {
            if (ip[yy * w + xq] > best) {
              best = ip[yy * w + xq];
              best_idx = yy * w + xq;
            }
          }
        }
        o[p * h * w + y * w + xx] = best;
        argmax[p * h * w + y * w + xx] = best_idx;
      }
    }
  }
  attach_backward(out, {x}, [x, argmax = std::move(argmax), h, w](const TensorImpl& r) mutable {
    auto g = x.mutable_grad();
    const int64_t plane = static_cast<int64_t>(h) * w;
    for (size_t i = 0; i < r.grad.size(); ++i) {
      g[(static_cast<int64_t>(i) / plane) * plane + argmax[i]] += r.grad[i];
    }
  });
  return out;
}

namespace {

// Reduction over the spatial dims (per channel) or over channels (per pixel).
enum class ReduceAxis { kSpatial, kChannel };
enum class ReduceKind { kMean, kMax };

Tensor reduce(const Tensor& x, ReduceAxis axis, ReduceKind kind, const char* name) {
  require_rank4(x, name);
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int64_t plane = static_cast<int64_t>(h) * w;
  Shape shape = axis == ReduceAxis::kSpatial ? Shape{n, c, 1, 1} : Shape{n, 1, h, w};
  record_cost(0, x.numel());
  Tensor out = make_result(shape, {x});
  if (out.is_meta()) return out;
  const auto in = x.data();
  auto o = out.data();
  // Each output element reduces `len` inputs spaced `step` apart from `start(j)`.
  const int64_t len = axis == ReduceAxis::kSpatial ? plane : c;
  const int64_t step = axis == ReduceAxis::kSpatial ? 1 : plane;
  auto start = [=](int64_t j) {
    return axis == ReduceAxis::kSpatial ? j * plane : (j / plane) * c * plane + (j % plane);
  };
  std::vector<int64_t> winner;
  if (kind == ReduceKind::kMax) winner.resize(o.size());
  for (size_t j = 0; j < o.size(); ++j) {
    const int64_t s = start(static_cast<int64_t>(j));
    if (kind == ReduceKind::kMean) {
      double acc = 0.0;
      for (int64_t i = 0; i < len; ++i) acc += in[s + i * step];
      o[j] = acc / static_cast<double>(len);
    } else {
      int64_t best = s;
      for (int64_t i = 1; i < len; ++i) {
        if (in[s + i * step] > in[best]) best = s + i * step;
      }
      o[j] = in[best];
      winner[j] = best;
    }
  }
  attach_backward(out, {x}, [x, kind, len, step, start, winner = std::move(winner)](
                                const TensorImpl& r) mutable {
    auto g = x.mutable_grad();
    for (size_t j = 0; j < r.grad.size(); ++j) {
      if (kind == ReduceKind::kMax) {
        g[winner[j]] += r.grad[j];
        continue;
      }
      const int64_t s = start(static_cast<int64_t>(j));
      const double v = r.grad[j] / static_cast<double>(len);
      for (int64_t i = 0; i < len; ++i) g[s + i * step] += v;
    }
  });
  return out;
}

}  // namespace

Tensor global_avg_pool(const Tensor& x) {
  return reduce(x, ReduceAxis::kSpatial, ReduceKind::kMean, "global_avg_pool");
}
Tensor global_max_pool(const Tensor& x) {
  return reduce(x, ReduceAxis::kSpatial, ReduceKind::kMax, "global_max_pool");
}
Tensor channel_mean(const Tensor& x) {
  return reduce(x, ReduceAxis::kChannel, ReduceKind::kMean, "channel_mean");
}
Tensor channel_max(const Tensor& x) {
  return reduce(x, ReduceAxis::kChannel, ReduceKind::kMax, "channel_max");
}

// --- focus / pixel shuffle --------------------------------------------------

namespace {

// Index map shared by both directions: flat index in the [N, C*r*r, H/r, W/r]
// layout -> flat index in the [N, C, H, W] layout.
std::vector<int64_t> shuffle_map(int n, int c, int h, int w, int r) {
  const int hs = h / r, ws = w / r;
  std::vector<int64_t> map(static_cast<size_t>(n) * c * h * w);
  int64_t k = 0;
  for (int b = 0; b < n; ++b) {
    for (int ch = 0; ch < c; ++ch) {
      for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
          for (int y = 0; y < hs; ++y) {
            for (int xx = 0; xx < ws; ++xx) {
              map[k++] = ((static_cast<int64_t>(b) * c + ch) * h + y * r + i) * w + xx * r + j;
            }
          }
        }
      }
    }
  }
  return map;
}

// out[i] = in[src[i]] when gather, out[src[i]] = in[i] otherwise.
Tensor permute(const Tensor& x, Shape shape, std::vector<int64_t> map, bool gather) {
  Tensor out = make_result(std::move(shape), {x});
  if (out.is_meta()) return out;
  const auto in = x.data();
  auto o = out.data();
  if (gather) {
    for (size_t i = 0; i < map.size(); ++i) o[i] = in[map[i]];
  } else {
    for (size_t i = 0; i < map.size(); ++i) o[map[i]] = in[i];
  }
  attach_backward(out, {x}, [x, map = std::move(map), gather](const TensorImpl& r) mutable {
    auto g = x.mutable_grad();
    if (gather) {
      for (size_t i = 0; i < map.size(); ++i) g[map[i]] += r.grad[i];
    } else {
      for (size_t i = 0; i < map.size(); ++i) g[i] += r.grad[map[i]];
    }
  });
  return out;
}

}  // namespace

Tensor focus(const Tensor& x, int r) {
  require(x.defined() && (x.rank() == 3 || x.rank() == 4), "focus: expected [C,H,W] or [N,C,H,W]");
  require(r >= 1, "focus: factor must be positive");
  const bool batched = x.rank() == 4;
  const int n = batched ? x.dim(0) : 1;
  const int c = x.dim(-3), h = x.dim(-2), w = x.dim(-1);
  require(h % r == 0 && w % r == 0, "focus: spatial size " + std::to_string(h) + "x" +
                                        std::to_string(w) + " not divisible by " +
                                        std::to_string(r));
  Shape shape = batched ? Shape{n, c * r * r, h / r, w / r} : Shape{c * r * r, h / r, w / r};
  if (x.is_meta()) return Tensor::meta(shape);
  return permute(x, std::move(shape), shuffle_map(n, c, h, w, r), true);
}

Tensor pixel_shuffle(const Tensor& x, int r) {
  require(x.defined() && (x.rank() == 3 || x.rank() == 4),
          "pixel_shuffle: expected [C,H,W] or [N,C,H,W]");
  require(r >= 1, "pixel_shuffle: factor must be positive");
  const bool batched = x.rank() == 4;
  const int n = batched ? x.dim(0) : 1;
  const int cr = x.dim(-3), h = x.dim(-2), w = x.dim(-1);
  require(cr % (r * r) == 0, "pixel_shuffle: " + std::to_string(cr) +
                                 " channels not divisible by " + std::to_string(r * r));
  const int c = cr / (r * r);
  Shape shape = batched ? Shape{n, c, h * r, w * r} : Shape{c, h * r, w * r};
  if (x.is_meta()) return Tensor::meta(shape);
  return permute(x, std::move(shape), shuffle_map(n, c, h * r, w * r, r), false);
}

}  // namespace fasterx::ops
