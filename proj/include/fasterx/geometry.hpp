/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <optional>
#include <vector>

#include "fasterx/tensor.hpp"

namespace fasterx {

inline constexpr double kGeomEps = 1e-9;

// Center form.
struct CenterBox {
  double cx = 0, cy = 0, w = 0, h = 0;
};

// Corner form, image pixels.
struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double cx() const { return 0.5 * (x1 + x2); }
  double cy() const { return 0.5 * (y1 + y2); }
  bool valid() const { return x2 >= x1 && y2 >= y1; }

  bool operator==(const Box&) const = default;
};

CenterBox to_center(const Box& b);
Box to_corners(const CenterBox& b);

// Intersection over union; 0 when the union is empty. Throws on NaN input.
double iou(const Box& a, const Box& b);

// 1 - IoU + d^2/c^2 + alpha * v with v = (4/pi^2)(atan(wg/hg) - atan(w/h))^2
// and alpha = v / ((1 - IoU) + v). `alpha_override` pins the trade-off factor
// (used to evaluate the function the analytic gradient differentiates).
struct CiouTerms {
  double iou = 0, center_term = 0, v = 0, alpha = 0, loss = 0;
};
CiouTerms ciou_terms(const Box& pred, const Box& gt,
                     std::optional<double> alpha_override = std::nullopt);
double ciou_loss(const Box& pred, const Box& gt);

// Loss and its gradient with respect to the predicted center-form box. alpha
// is treated as a constant (not differentiated).
double ciou_loss_grad(const CenterBox& pred, const CenterBox& gt, std::array<double, 4>& dpred);

// Tensor form: pred and gt are [M, 4] center-form boxes; returns [M] losses.
// Differentiable in pred with alpha detached.
Tensor ciou_loss(const Tensor& pred, const Tensor& gt);

// Test hook for gradient checks of CIoU-based losses: the first evaluation in
// scope records each CIoU trade-off factor alpha; later evaluations (after
// begin_eval()) replay them in order, so finite differences see alpha held
// constant exactly as the analytic gradient does.
class CiouAlphaFreeze {
 public:
  CiouAlphaFreeze();
  ~CiouAlphaFreeze();
  CiouAlphaFreeze(const CiouAlphaFreeze&) = delete;
  CiouAlphaFreeze& operator=(const CiouAlphaFreeze&) = delete;
  void begin_eval();

  // Returns the recorded alpha in replay mode, else records and returns it.
  static double resolve(double alpha);

 private:
  std::vector<double> alphas_;
  size_t pos_ = 0;
  int evals_ = 0;
  CiouAlphaFreeze* previous_;
};

// Cell (i, j) covers pixels starting at (j * stride, i * stride).
struct GridSpec {
  int stride = 0;
  int h = 0;
  int w = 0;
  int64_t cells() const { return static_cast<int64_t>(h) * w; }
};

// raw [N, 4, H, W] (dx, dy, dw, dh) -> [N, H*W, 4] center-form boxes:
// cx = (dx + j) * s, cy = (dy + i) * s, w = exp(dw) * s, h = exp(dh) * s.
Tensor decode(const Tensor& raw, const GridSpec& grid);
// Inverse of decode for strictly positive sizes: [N, H*W, 4] -> [N, 4, H, W].
Tensor encode(const Tensor& boxes, const GridSpec& grid);

}  // namespace fasterx
