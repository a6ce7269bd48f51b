/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/profiler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fasterx/cost.hpp"

namespace fasterx {

namespace {

std::string truncate_path(const std::string& path, int depth) {
  if (path.empty()) return "(other)";
  size_t pos = 0;
  for (int d = 0; d < depth; ++d) {
    pos = path.find('.', pos);
    if (pos == std::string::npos) return path;
    if (d + 1 < depth) ++pos;
  }
  return path.substr(0, pos);
}

// Parameter "a.b.weight" belongs to module path "a.b".
std::string owner(const std::string& param) {
  std::string p = param;
  for (const char* suffix : {".bn.weight", ".bn.bias", ".weight", ".bias"}) {
    const std::string s(suffix);
    if (p.size() > s.size() && p.compare(p.size() - s.size(), s.size(), s) == 0) {
      return p.substr(0, p.size() - s.size());
    }
  }
  return p;
}

std::unique_ptr<Detector> resized(const Detector& model, int input_size) {
  ModelConfig cfg = model.config();
  cfg.input_size = input_size;
  cfg.distill.enabled = false;
  return std::make_unique<Detector>(cfg);
}

CostRecorder trace(const Detector& model, int input_size) {
  auto m = resized(model, input_size);
  m->train(false);
  CostRecorder rec;
  CostRecordingGuard guard(rec);
  NoGradGuard ng;
  m->forward(Tensor::meta({1, 3, input_size, input_size}));
  return rec;
}

}  // namespace

int64_t count_params(const Module& model, bool include_training_only) {
  int64_t n = 0;
  for (const auto& [name, t] : model.named_parameters()) {
    if (!include_training_only && Detector::is_training_only(name)) continue;
    n += t.numel();
  }
  return n;
}

int64_t count_flops(const Detector& model, int input_size) {
  return trace(model, input_size).total().units();
}

CostReport profile_model(const Detector& model, int input_size, int depth) {
  CostReport r;
  r.input_size = input_size;
  for (const auto& [name, t] : model.named_parameters()) {
    if (Detector::is_training_only(name)) continue;
    r.breakdown[truncate_path(owner(name), depth)].params += t.numel();
    r.params += t.numel();
  }
  const CostRecorder rec = trace(model, input_size);
  for (const auto& [scope, c] : rec.by_scope()) {
    r.breakdown[truncate_path(scope, depth)].flop_units += c.units();
  }
  r.flop_units = rec.total().units();
  return r;
}

std::string format_report(const CostReport& r) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-32s %14s %16s\n", "module", "params", "GFLOPs");
  os << line;
  for (const auto& [path, c] : r.breakdown) {
    std::snprintf(line, sizeof line, "%-32s %14lld %16.4f\n", path.c_str(),
                  static_cast<long long>(c.params), 2.0 * c.flop_units / 1e9);
    os << line;
  }
  std::snprintf(line, sizeof line, "%-32s %14lld %16.4f\n", "total",
                static_cast<long long>(r.params), r.gflops());
  os << line;
  std::snprintf(line, sizeof line, "%s @ %d: %.3f M params, %.2f GFLOPs\n",
                r.name.empty() ? "model" : r.name.c_str(), r.input_size, r.params_m(), r.gflops());
  os << line;
  return os.str();
}

std::string format_report_line(const CostReport& r) {
  std::ostringstream os;
  os << "name=" << (r.name.empty() ? "model" : r.name) << " input=" << r.input_size
     << " params=" << r.params << " flop_units=" << r.flop_units;
  char g[32];
  std::snprintf(g, sizeof g, "%.4f", r.gflops());
  os << " gflops=" << g;
  return os.str();
}

LatencyStats time_calls(const std::function<void()>& fn, int reps, int warmup, int batch) {
  if (reps < 1 || batch < 1) throw std::invalid_argument("time_calls: reps and batch must be >= 1");
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> ms;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count() / batch);
  }
  LatencyStats s;
  s.reps = reps;
  s.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / reps;
  std::sort(ms.begin(), ms.end());
  // Nearest-rank percentiles.
  auto pct = [&](double q) {
    const size_t k = static_cast<size_t>(std::ceil(q * reps)) - 1;
    return ms[std::min(k, ms.size() - 1)];
  };
  s.p50_ms = pct(0.50);
  s.p95_ms = pct(0.95);
  return s;
}

LatencyStats time_forward(Detector& model, int input_size, int reps, int warmup) {
  if (input_size != model.config().input_size) {
    throw std::invalid_argument("time_forward: model was built for input " +
                                std::to_string(model.config().input_size));
  }
  const bool was_training = model.training();
  model.train(false);
  Tensor x({1, 3, input_size, input_size}, 0.5);
  auto stats = time_calls(
      [&] {
        NoGradGuard ng;
        model.forward(x);
      },
      reps, warmup);
  model.train(was_training);
  return stats;
}

}  // namespace fasterx
