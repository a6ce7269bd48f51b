/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/cost.hpp"

namespace fasterx {

namespace {
thread_local CostRecorder* t_recorder = nullptr;
}

void CostRecorder::add(int64_t macs, int64_t elementwise) {
  auto& slot = by_scope_[stack_.empty() ? std::string() : stack_.back()];
  slot.macs += macs;
  slot.elementwise += elementwise;
}

OpCost CostRecorder::total() const {
  OpCost t;
  for (const auto& [_, c] : by_scope_) {
    t.macs += c.macs;
    t.elementwise += c.elementwise;
  }
  return t;
}

CostRecordingGuard::CostRecordingGuard(CostRecorder& recorder) : previous_(t_recorder) {
  t_recorder = &recorder;
}
CostRecordingGuard::~CostRecordingGuard() { t_recorder = previous_; }

CostScope::CostScope(std::string_view scope) : recorder_(t_recorder) {
  if (recorder_) recorder_->push(scope);
}
CostScope::~CostScope() {
  if (recorder_) recorder_->pop();
}

void record_cost(int64_t macs, int64_t elementwise) {
  if (t_recorder) t_recorder->add(macs, elementwise);
}

}  // namespace fasterx
