/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fasterx {

namespace {

void reject_nan(const Box& b) {
  if (std::isnan(b.x1) || std::isnan(b.y1) || std::isnan(b.x2) || std::isnan(b.y2)) {
    throw std::invalid_argument("box has NaN coordinates");
  }
}

constexpr double kVScale = 4.0 / (std::numbers::pi * std::numbers::pi);

}  // namespace

CenterBox to_center(const Box& b) { return {b.cx(), b.cy(), b.width(), b.height()}; }

Box to_corners(const CenterBox& b) {
  return {b.cx - 0.5 * b.w, b.cy - 0.5 * b.h, b.cx + 0.5 * b.w, b.cy + 0.5 * b.h};
}

double iou(const Box& a, const Box& b) {
  reject_nan(a);
  reject_nan(b);
  const double iw = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double ih = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

CiouTerms ciou_terms(const Box& p, const Box& g, std::optional<double> alpha_override) {
  reject_nan(p);
  reject_nan(g);
  CiouTerms t;
  const double iw = std::max(0.0, std::min(p.x2, g.x2) - std::max(p.x1, g.x1));
  const double ih = std::max(0.0, std::min(p.y2, g.y2) - std::max(p.y1, g.y1));
  const double inter = iw * ih;
  t.iou = inter / (p.area() + g.area() - inter + kGeomEps);
  const double dx = p.cx() - g.cx(), dy = p.cy() - g.cy();
  const double cw = std::max(p.x2, g.x2) - std::min(p.x1, g.x1);
  const double ch = std::max(p.y2, g.y2) - std::min(p.y1, g.y1);
  t.center_term = (dx * dx + dy * dy) / (cw * cw + ch * ch + kGeomEps);
  const double dt = std::atan(g.width() / (g.height() + kGeomEps)) -
                    std::atan(p.width() / (p.height() + kGeomEps));
  t.v = kVScale * dt * dt;
  t.alpha = alpha_override ? *alpha_override : t.v / ((1.0 - t.iou) + t.v + kGeomEps);
  t.loss = 1.0 - t.iou + t.center_term + t.alpha * t.v;
  return t;
}

double ciou_loss(const Box& pred, const Box& gt) { return ciou_terms(pred, gt).loss; }

double ciou_loss_grad(const CenterBox& pc, const CenterBox& gc, std::array<double, 4>& dpred) {
  const Box p = to_corners(pc), g = to_corners(gc);
  CiouTerms t = ciou_terms(p, g);
  const double frozen = CiouAlphaFreeze::resolve(t.alpha);
  if (frozen != t.alpha) t = ciou_terms(p, g, frozen);
  // Gradients with respect to the corner coordinates (x1, y1, x2, y2).
  double d[4] = {0, 0, 0, 0};

  // -IoU term. IoU = I / U with U = Ap + Ag - I + eps.
  const double ix1 = std::max(p.x1, g.x1), ix2 = std::min(p.x2, g.x2);
  const double iy1 = std::max(p.y1, g.y1), iy2 = std::min(p.y2, g.y2);
  const double iw = ix2 - ix1, ih = iy2 - iy1;
  const double pw = p.width(), ph = p.height();
  if (iw > 0 && ih > 0) {
    const double inter = iw * ih;
    const double uni = pw * ph + g.area() - inter + kGeomEps;
    const double d_inter = -(uni + inter) / (uni * uni);  // d(-IoU)/dI
    if (p.x1 > g.x1) d[0] -= d_inter * ih;
    if (p.x2 < g.x2) d[2] += d_inter * ih;
    if (p.y1 > g.y1) d[1] -= d_inter * iw;
    if (p.y2 < g.y2) d[3] += d_inter * iw;
    const double d_area = inter / (uni * uni);  // d(-IoU)/dAp
    d[0] -= d_area * ph;
    d[2] += d_area * ph;
    d[1] -= d_area * pw;
    d[3] += d_area * pw;
  }

  // d^2 / c^2.
  const double dx = p.cx() - g.cx(), dy = p.cy() - g.cy();
  const double dist2 = dx * dx + dy * dy;
  const double cw = std::max(p.x2, g.x2) - std::min(p.x1, g.x1);
  const double ch = std::max(p.y2, g.y2) - std::min(p.y1, g.y1);
  const double c2 = cw * cw + ch * ch + kGeomEps;
  d[0] += dx / c2;
  d[2] += dx / c2;
  d[1] += dy / c2;
  d[3] += dy / c2;
  const double dc2 = -dist2 / (c2 * c2);
  if (p.x2 > g.x2) d[2] += dc2 * 2 * cw;
  if (p.x1 < g.x1) d[0] -= dc2 * 2 * cw;
  if (p.y2 > g.y2) d[3] += dc2 * 2 * ch;
  if (p.y1 < g.y1) d[1] -= dc2 * 2 * ch;

  // alpha * v with alpha held constant.
  const double hd = ph + kGeomEps;
  const double ratio = pw / hd;
  const double diff = std::atan(g.width() / (g.height() + kGeomEps)) - std::atan(ratio);
  const double dv_dt = -2.0 * kVScale * diff;  // v as a function of t = atan(w/h)
  const double k = 1.0 / (1.0 + ratio * ratio);
  const double dv_dw = t.alpha * dv_dt * k / hd;
  const double dv_dh = -t.alpha * dv_dt * k * pw / (hd * hd);
  d[2] += dv_dw;
  d[0] -= dv_dw;
  d[3] += dv_dh;
  d[1] -= dv_dh;

  // Corners -> center form: x1 = cx - w/2, x2 = cx + w/2.
  dpred = {d[0] + d[2], d[1] + d[3], 0.5 * (d[2] - d[0]), 0.5 * (d[3] - d[1])};
  return t.loss;
}

Tensor ciou_loss(const Tensor& pred, const Tensor& gt) {
  if (pred.rank() != 2 || pred.dim(1) != 4 || pred.shape() != gt.shape()) {
    throw std::invalid_argument("ciou_loss: expected matching [M,4] tensors, got " +
                                shape_str(pred.shape()) + " and " + shape_str(gt.shape()));
  }
  const int m = pred.dim(0);
  Tensor out = make_result({m}, {pred, gt});
  if (out.is_meta()) return out;
  std::vector<double> grads(static_cast<size_t>(m) * 4);
  auto pd = pred.data();
  auto gd = gt.data();
  for (int i = 0; i < m; ++i) {
    const CenterBox p{pd[4 * i], pd[4 * i + 1], pd[4 * i + 2], pd[4 * i + 3]};
    const CenterBox g{gd[4 * i], gd[4 * i + 1], gd[4 * i + 2], gd[4 * i + 3]};
    std::array<double, 4> dp;
    out.data()[i] = ciou_loss_grad(p, g, dp);
    std::copy(dp.begin(), dp.end(), grads.begin() + 4 * i);
  }
  attach_backward(out, {pred}, [pred, grads = std::move(grads)](const TensorImpl& r) {
    auto g = pred.mutable_grad();
    for (size_t i = 0; i < grads.size(); ++i) g[i] += r.grad[i / 4] * grads[i];
  });
  return out;
}

namespace {
thread_local CiouAlphaFreeze* active_freeze = nullptr;
}  // namespace

CiouAlphaFreeze::CiouAlphaFreeze() : previous_(active_freeze) { active_freeze = this; }
CiouAlphaFreeze::~CiouAlphaFreeze() { active_freeze = previous_; }

void CiouAlphaFreeze::begin_eval() {
  pos_ = 0;
  ++evals_;
}

double CiouAlphaFreeze::resolve(double alpha) {
  CiouAlphaFreeze* f = active_freeze;
  if (f == nullptr) return alpha;
  if (f->evals_ <= 1) {
    f->alphas_.push_back(alpha);
    return alpha;
  }
  if (f->pos_ >= f->alphas_.size()) throw std::logic_error("CiouAlphaFreeze: replay overrun");
  return f->alphas_[f->pos_++];
}

Tensor decode(const Tensor& raw, const GridSpec& grid) {
  if (raw.rank() != 4 || raw.dim(1) != 4 || raw.dim(2) != grid.h || raw.dim(3) != grid.w) {
    throw std::invalid_argument("decode: raw " + shape_str(raw.shape()) + " does not match grid " +
                                std::to_string(grid.h) + "x" + std::to_string(grid.w));
  }
  const int n = raw.dim(0);
  const int64_t cells = grid.cells();
  Tensor out = make_result({n, static_cast<int>(cells), 4}, {raw});
  if (out.is_meta()) return out;
  const double s = grid.stride;
  auto in = raw.data();
  auto o = out.data();
  for (int b = 0; b < n; ++b) {
    const double* r = in.data() + static_cast<int64_t>(b) * 4 * cells;
    double* ob = o.data() + static_cast<int64_t>(b) * cells * 4;
    for (int64_t c = 0; c < cells; ++c) {
      const int i = static_cast<int>(c / grid.w), j = static_cast<int>(c % grid.w);
      ob[4 * c + 0] = (r[c] + j) * s;
      ob[4 * c + 1] = (r[cells + c] + i) * s;
      ob[4 * c + 2] = std::exp(r[2 * cells + c]) * s;
      ob[4 * c + 3] = std::exp(r[3 * cells + c]) * s;
    }
  }
  attach_backward(out, {raw}, [raw, n, cells, s](const TensorImpl& r) {
    auto g = raw.mutable_grad();
    for (int b = 0; b < n; ++b) {
      double* gb = g.data() + static_cast<int64_t>(b) * 4 * cells;
      const double* go = r.grad.data() + static_cast<int64_t>(b) * cells * 4;
      const double* ov = r.data.data() + static_cast<int64_t>(b) * cells * 4;
      for (int64_t c = 0; c < cells; ++c) {
        gb[c] += go[4 * c] * s;
        gb[cells + c] += go[4 * c + 1] * s;
        gb[2 * cells + c] += go[4 * c + 2] * ov[4 * c + 2];
        gb[3 * cells + c] += go[4 * c + 3] * ov[4 * c + 3];
      }
    }
  });
  return out;
}

Tensor encode(const Tensor& boxes, const GridSpec& grid) {
  if (boxes.rank() != 3 || boxes.dim(1) != grid.cells() || boxes.dim(2) != 4) {
    throw std::invalid_argument("encode: boxes " + shape_str(boxes.shape()) +
                                " do not match grid");
  }
  const int n = boxes.dim(0);
  const int64_t cells = grid.cells();
  Tensor out({n, 4, grid.h, grid.w});
  const double s = grid.stride;
  for (int b = 0; b < n; ++b) {
    for (int64_t c = 0; c < cells; ++c) {
      const int i = static_cast<int>(c / grid.w), j = static_cast<int>(c % grid.w);
      const double* bx = boxes.data().data() + (static_cast<int64_t>(b) * cells + c) * 4;
      if (bx[2] <= 0 || bx[3] <= 0) throw std::invalid_argument("encode: non-positive box size");
      double* o = out.data().data() + static_cast<int64_t>(b) * 4 * cells;
      o[c] = bx[0] / s - j;
      o[cells + c] = bx[1] / s - i;
      o[2 * cells + c] = std::log(bx[2] / s);
      o[3 * cells + c] = std::log(bx[3] / s);
    }
  }
  return out;
}

}  // namespace fasterx
