/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fasterx/losses.hpp"
#include "fasterx/model.hpp"

namespace fasterx {

enum class TrainPhase { kPlain, kJoint, kGuided };
std::string to_string(TrainPhase p);

// Phase for an epoch under the model's distillation settings.
TrainPhase phase_for_epoch(const DistillConfig& cfg, int epoch);

using Assignments = std::vector<AssignmentResult>;

struct StepResult {
  TrainPhase phase = TrainPhase::kPlain;
  Tensor loss;  // what the optimizer minimises
  LossBundle student;
  std::optional<LossBundle> aux;
  double align = 0;  // unweighted feature alignment term
  // In the guided phase both point at the same assignment.
  std::shared_ptr<const Assignments> student_assign;
  std::shared_ptr<const Assignments> aux_assign;
  uint64_t assign_calls = 0;
};

// One forward/loss evaluation (no backward).
//   plain  - distillation off: student detection loss only.
//   joint  - epoch < warmup: student and aux each assigned on their own
//            predictions; total = student + aux + lambda * alignment.
//   guided - epoch >= warmup: one assignment on the aux predictions supervises
//            both heads; same total.
StepResult training_step(Detector& model, const Tensor& images,
                         const std::vector<std::vector<GroundTruth>>& targets, int epoch,
                         const AssignConfig& assign_cfg = {}, const LossConfig& loss_cfg = {});

}  // namespace fasterx
