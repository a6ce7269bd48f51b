/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/distill.hpp"

#include <stdexcept>

namespace fasterx {

std::string to_string(TrainPhase p) {
  switch (p) {
    case TrainPhase::kPlain: return "plain";
    case TrainPhase::kJoint: return "joint";
    case TrainPhase::kGuided: return "guided";
  }
  return "?";
}

TrainPhase phase_for_epoch(const DistillConfig& cfg, int epoch) {
  if (!cfg.enabled) return TrainPhase::kPlain;
  return epoch < cfg.warmup_epochs ? TrainPhase::kJoint : TrainPhase::kGuided;
}

namespace {

std::shared_ptr<const Assignments> assign_all(const std::vector<HeadOutput>& outputs,
                                              const std::vector<std::vector<GroundTruth>>& targets,
                                              const AssignConfig& cfg) {
  auto out = std::make_shared<Assignments>();
  out->reserve(targets.size());
  for (size_t b = 0; b < targets.size(); ++b) {
    out->push_back(simota_assign(make_candidates(outputs, static_cast<int>(b)), targets[b], cfg));
  }
  return out;
}

}  // namespace

StepResult training_step(Detector& model, const Tensor& images,
                         const std::vector<std::vector<GroundTruth>>& targets, int epoch,
                         const AssignConfig& assign_cfg, const LossConfig& loss_cfg) {
  const DistillConfig& dc = model.config().distill;
  if (images.rank() != 4 || images.dim(0) != static_cast<int>(targets.size())) {
    throw std::invalid_argument("training_step: batch size and target count differ");
  }
  if (dc.enabled && !model.has_aux()) {
    throw std::logic_error("training_step: distillation enabled but the model has no aux heads");
  }
  if (dc.lambda < 0 || dc.warmup_epochs < 0) {
    throw std::invalid_argument("training_step: distill.lambda and distill.warmup_epochs must be >= 0");
  }
  const uint64_t calls_before = simota_invocations();
  StepResult r;
  r.phase = phase_for_epoch(dc, epoch);

  if (r.phase == TrainPhase::kPlain) {
    const auto out = model.forward(images);
    r.student_assign = assign_all(out, targets, assign_cfg);
    r.student = detection_loss(out, *r.student_assign, targets, loss_cfg);
    r.loss = r.student.total;
    r.assign_calls = simota_invocations() - calls_before;
    return r;
  }

  const DetectorOutput out = model.forward_train(images);
  // Assignment reads detached values, so no gradient reaches the predictions
  // it was computed from.
  r.aux_assign = assign_all(out.aux, targets, assign_cfg);
  if (r.phase == TrainPhase::kJoint) {
    r.student_assign = assign_all(out.student, targets, assign_cfg);
  } else {
    r.student_assign = r.aux_assign;
  }
  r.student = detection_loss(out.student, *r.student_assign, targets, loss_cfg);
  r.aux = detection_loss(out.aux, *r.aux_assign, targets, loss_cfg);
  if (r.phase == TrainPhase::kGuided && r.student.num_fg != r.aux->num_fg) {
    throw std::logic_error("training_step: guided student foreground differs from aux assignment");
  }

  std::vector<Tensor> aux_features;
  for (const auto& h : out.aux) aux_features.push_back(h.feature);
  r.loss = distill_total(r.student, *r.aux, out.aligned, aux_features, dc.lambda);
  {
    NoGradGuard ng;
    std::vector<Tensor> a, b;
    for (const auto& t : out.aligned) a.push_back(t.detach());
    for (const auto& t : aux_features) b.push_back(t.detach());
    r.align = feature_alignment(a, b).item();
  }
  r.assign_calls = simota_invocations() - calls_before;
  return r;
}

}  // namespace fasterx
