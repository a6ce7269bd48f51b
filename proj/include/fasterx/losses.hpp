/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <vector>

#include "fasterx/assignment.hpp"
#include "fasterx/heads.hpp"

namespace fasterx {

inline constexpr double kProbEps = 1e-9;

// -alpha_t * (1 - p_t)^gamma * log(p_t), p clamped to [eps, 1 - eps].
double focal_loss(double p, int y, double gamma = 2.0, double alpha = 0.25);
// d focal_loss / d p (zero outside the clamp range).
double focal_loss_grad(double p, int y, double gamma = 2.0, double alpha = 0.25);
// Binary cross-entropy on a probability, clamped like focal_loss.
double bce(double p, int y);

// Tensor form: sum of focal losses over elements; p in (0,1), y in {0,1}.
Tensor focal_loss(const Tensor& p, const Tensor& y, double gamma = 2.0, double alpha = 0.25);

struct LossConfig {
  double reg_weight = 5.0;
  double focal_gamma = 2.0;
  double focal_alpha = 0.25;
};

struct LossBundle {
  Tensor total;  // differentiable scalar
  double cls = 0, reg = 0, obj = 0;
  int num_fg = 0;
  double total_value() const { return total.item(); }
};

// cls: focal over every class of each foreground location (one-hot target of
// the matched GT, applied to sigmoid(cls logits)); reg: CIoU between the
// decoded box and its GT; obj: BCE with logits over all locations. Each term
// is summed over the batch and divided by max(num_fg, 1).
// total = cls + reg_weight * reg + obj.
LossBundle detection_loss(const std::vector<HeadOutput>& outputs,
                          const std::vector<AssignmentResult>& assignments,
                          const std::vector<std::vector<GroundTruth>>& targets,
                          const LossConfig& cfg = {});

// Mean squared difference over all elements of all feature pairs.
Tensor feature_alignment(const std::vector<Tensor>& student, const std::vector<Tensor>& aux);

// loss_pix.total + loss_aux.total + lambda * feature_alignment(f_pix, f_aux).
Tensor distill_total(const LossBundle& loss_pix, const LossBundle& loss_aux,
                     const std::vector<Tensor>& f_pix, const std::vector<Tensor>& f_aux,
                     double lambda);

}  // namespace fasterx
