/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "fasterx/model.hpp"

namespace fasterx {

// Trainable scalars. Aux heads and alignment projections are excluded unless
// include_training_only is set.
int64_t count_params(const Module& model, bool include_training_only = false);

// Analytic cost of one inference forward at input_size x input_size, in
// units of one multiply-accumulate (see cost.hpp). Traced shape-only.
int64_t count_flops(const Detector& model, int input_size);

struct CostEntry {
  int64_t params = 0;
  int64_t flop_units = 0;
};

struct CostReport {
  std::string name;
  int input_size = 0;
  int64_t params = 0;
  int64_t flop_units = 0;
  // Module path (truncated to the requested depth) -> cost. Sums to totals.
  std::map<std::string, CostEntry> breakdown;

  double params_m() const { return params / 1e6; }
  // Reported GFLOPs count two floating-point operations per unit.
  double gflops() const { return 2.0 * flop_units / 1e9; }
};

CostReport profile_model(const Detector& model, int input_size, int depth = 2);

// Human-readable table and a single machine-readable line.
std::string format_report(const CostReport& r);
std::string format_report_line(const CostReport& r);

struct LatencyStats {
  double mean_ms = 0, p50_ms = 0, p95_ms = 0;
  int reps = 0;
};

// Times `fn` reps times after `warmup` untimed calls; `batch` divides the
// per-call time into per-image figures.
LatencyStats time_calls(const std::function<void()>& fn, int reps, int warmup, int batch = 1);
LatencyStats time_forward(Detector& model, int input_size, int reps = 10, int warmup = 2);

}  // namespace fasterx
