/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fasterx {

// Cost units: one multiply-accumulate is one unit; normalization, activation
// and pooling cost one unit per produced element; pure rearrangements are free.
struct OpCost {
  int64_t macs = 0;
  int64_t elementwise = 0;
  int64_t units() const { return macs + elementwise; }
};

// Collects op costs attributed to the innermost active CostScope.
class CostRecorder {
 public:
  void add(int64_t macs, int64_t elementwise);
  const std::map<std::string, OpCost>& by_scope() const { return by_scope_; }
  OpCost total() const;

  void push(std::string_view scope) { stack_.emplace_back(scope); }
  void pop() { stack_.pop_back(); }

 private:
  std::map<std::string, OpCost> by_scope_;
  std::vector<std::string> stack_;
};

// Installs a recorder for the current thread for the guard's lifetime.
class CostRecordingGuard {
 public:
  explicit CostRecordingGuard(CostRecorder& recorder);
  ~CostRecordingGuard();
  CostRecordingGuard(const CostRecordingGuard&) = delete;
  CostRecordingGuard& operator=(const CostRecordingGuard&) = delete;

 private:
  CostRecorder* previous_;
};

class CostScope {
 public:
  explicit CostScope(std::string_view scope);
  ~CostScope();
  CostScope(const CostScope&) = delete;
  CostScope& operator=(const CostScope&) = delete;

 private:
  CostRecorder* recorder_;
};

void record_cost(int64_t macs, int64_t elementwise);

}  // namespace fasterx
