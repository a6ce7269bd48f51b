/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fasterx/ops.hpp"

namespace fasterx {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

bool clamped(double p) { return p < kProbEps || p > 1.0 - kProbEps; }

// BCE with logits, stable form.
double bce_logits(double z, int y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

double focal_loss(double p, int y, double gamma, double alpha) {
  p = std::clamp(p, kProbEps, 1.0 - kProbEps);
  if (y == 1) return -alpha * std::pow(1.0 - p, gamma) * std::log(p);
  return -(1.0 - alpha) * std::pow(p, gamma) * std::log(1.0 - p);
}

double focal_loss_grad(double p, int y, double gamma, double alpha) {
  if (clamped(p)) return 0.0;
  if (y == 1) {
    const double q = 1.0 - p;
    return alpha * (gamma * std::pow(q, gamma - 1.0) * std::log(p) - std::pow(q, gamma) / p);
  }
  return -(1.0 - alpha) *
         (gamma * std::pow(p, gamma - 1.0) * std::log(1.0 - p) - std::pow(p, gamma) / (1.0 - p));
}

double bce(double p, int y) {
  p = std::clamp(p, kProbEps, 1.0 - kProbEps);
  return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

Tensor focal_loss(const Tensor& p, const Tensor& y, double gamma, double alpha) {
  if (p.shape() != y.shape()) {
    throw std::invalid_argument("focal_loss: shape mismatch " + shape_str(p.shape()) + " vs " +
                                shape_str(y.shape()));
  }
  Tensor out = make_result({}, {p});
  if (out.is_meta()) return out;
  const int64_t n = p.numel();
  std::vector<double> grads(n);
  double total = 0;
  for (int64_t i = 0; i < n; ++i) {
    const int label = y[i] > 0.5 ? 1 : 0;
    total += focal_loss(p[i], label, gamma, alpha);
    grads[i] = focal_loss_grad(p[i], label, gamma, alpha);
  }
  out.data()[0] = total;
  attach_backward(out, {p}, [p, grads = std::move(grads)](const TensorImpl& r) {
    auto g = p.mutable_grad();
    for (size_t i = 0; i < grads.size(); ++i) g[i] += r.grad[0] * grads[i];
  });
  return out;
}

LossBundle detection_loss(const std::vector<HeadOutput>& outputs,
                          const std::vector<AssignmentResult>& assignments,
                          const std::vector<std::vector<GroundTruth>>& targets,
                          const LossConfig& cfg) {
  if (outputs.empty()) throw std::invalid_argument("detection_loss: no outputs");
  const int batch = outputs[0].cls.dim(0);
  const int nc = outputs[0].cls.dim(1);
  if (static_cast<int>(assignments.size()) != batch || static_cast<int>(targets.size()) != batch) {
    throw std::invalid_argument("detection_loss: need one assignment and target list per image");
  }
  std::vector<Tensor> inputs;
  std::vector<int64_t> offsets;  // first candidate index of each level
  int64_t total_cells = 0;
  for (const HeadOutput& o : outputs) {
    inputs.push_back(o.cls);
    inputs.push_back(o.reg);
    inputs.push_back(o.obj);
    offsets.push_back(total_cells);
    total_cells += o.grid.cells();
  }
  LossBundle lb;
  lb.total = make_result({}, inputs);
  if (lb.total.is_meta()) return lb;

  for (int b = 0; b < batch; ++b) {
    const AssignmentResult& a = assignments[b];
    if (static_cast<int64_t>(a.matched_gt.size()) != total_cells) {
      throw std::invalid_argument("detection_loss: assignment size does not match outputs");
    }
    lb.num_fg += a.num_fg;
  }
  const double norm = 1.0 / std::max(lb.num_fg, 1);

  std::vector<std::vector<double>> grads(inputs.size());
  for (size_t i = 0; i < inputs.size(); ++i) grads[i].assign(inputs[i].numel(), 0.0);
  double cls_sum = 0, reg_sum = 0, obj_sum = 0;

  for (size_t l = 0; l < outputs.size(); ++l) {
    const HeadOutput& o = outputs[l];
    const int64_t cells = o.grid.cells();
    const double s = o.grid.stride;
    std::vector<double>& gcls = grads[3 * l];
    std::vector<double>& greg = grads[3 * l + 1];
    std::vector<double>& gobj = grads[3 * l + 2];
    for (int b = 0; b < batch; ++b) {
      const AssignmentResult& a = assignments[b];
      const double* cls = o.cls.data().data() + static_cast<int64_t>(b) * nc * cells;
      const double* reg = o.reg.data().data() + static_cast<int64_t>(b) * 4 * cells;
      const double* obj = o.obj.data().data() + static_cast<int64_t>(b) * cells;
      const int64_t cb = static_cast<int64_t>(b) * nc * cells, rb = static_cast<int64_t>(b) * 4 * cells,
                    ob = static_cast<int64_t>(b) * cells;
      for (int64_t c = 0; c < cells; ++c) {
        const int gt = a.matched_gt[offsets[l] + c];
        const int y = gt >= 0 ? 1 : 0;
        obj_sum += bce_logits(obj[c], y);
        gobj[ob + c] = (sigmoid(obj[c]) - y) * norm;
        if (gt < 0) continue;
        const GroundTruth& target = targets[b].at(gt);
        for (int k = 0; k < nc; ++k) {
          const double z = cls[k * cells + c];
          const double p = sigmoid(z);
          const int yk = k == target.cls ? 1 : 0;
          cls_sum += focal_loss(p, yk, cfg.focal_gamma, cfg.focal_alpha);
          gcls[cb + k * cells + c] =
              focal_loss_grad(p, yk, cfg.focal_gamma, cfg.focal_alpha) * p * (1.0 - p) * norm;
        }
        const int i = static_cast<int>(c / o.grid.w), j = static_cast<int>(c % o.grid.w);
        const CenterBox pred{(reg[c] + j) * s, (reg[cells + c] + i) * s,
                             std::exp(reg[2 * cells + c]) * s, std::exp(reg[3 * cells + c]) * s};
        std::array<double, 4> d;
        reg_sum += ciou_loss_grad(pred, to_center(target.box), d);
        const double w = cfg.reg_weight * norm;
        greg[rb + c] = d[0] * s * w;
        greg[rb + cells + c] = d[1] * s * w;
        greg[rb + 2 * cells + c] = d[2] * pred.w * w;
        greg[rb + 3 * cells + c] = d[3] * pred.h * w;
      }
    }
  }
  lb.cls = cls_sum * norm;
  lb.reg = reg_sum * norm;
  lb.obj = obj_sum * norm;
  lb.total.data()[0] = lb.cls + cfg.reg_weight * lb.reg + lb.obj;
  attach_backward(lb.total, inputs, [inputs, grads = std::move(grads)](const TensorImpl& r) {
    const double up = r.grad[0];
    for (size_t t = 0; t < inputs.size(); ++t) {
      if (!inputs[t].requires_grad()) continue;
      auto g = inputs[t].mutable_grad();
      const std::vector<double>& src = grads[t];
      for (size_t i = 0; i < src.size(); ++i) g[i] += up * src[i];
    }
  });
  return lb;
}

Tensor feature_alignment(const std::vector<Tensor>& student, const std::vector<Tensor>& aux) {
  if (student.size() != aux.size() || student.empty()) {
    throw std::invalid_argument("feature_alignment: need matching non-empty feature lists");
  }
  Tensor acc;
  int64_t count = 0;
  for (size_t i = 0; i < student.size(); ++i) {
    if (student[i].shape() != aux[i].shape()) {
      throw std::invalid_argument("feature_alignment: level " + std::to_string(i) + " shape " +
                                  shape_str(student[i].shape()) + " vs " +
                                  shape_str(aux[i].shape()));
    }
    const Tensor d = ops::sub(student[i], aux[i]);
    const Tensor sq = ops::sum(ops::mul(d, d));
    acc = acc.defined() ? ops::add(acc, sq) : sq;
    count += student[i].numel();
  }
  return ops::scale(acc, 1.0 / static_cast<double>(count));
}

Tensor distill_total(const LossBundle& loss_pix, const LossBundle& loss_aux,
                     const std::vector<Tensor>& f_pix, const std::vector<Tensor>& f_aux,
                     double lambda) {
  const Tensor base = ops::add(loss_pix.total, loss_aux.total);
  return ops::add(base, ops::scale(feature_alignment(f_pix, f_aux), lambda));
}

}  // namespace fasterx
