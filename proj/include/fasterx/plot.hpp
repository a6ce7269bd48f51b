/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <string>
#include <utility>
#include <vector>

namespace fasterx {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (epoch, value)
};

// Reads `metric` from each line of a JSONL training log; lines without the
// metric (or with null) are skipped. Throws on unreadable or malformed logs.
Series read_series(const std::string& log_path, const std::string& metric, const std::string& label);

// Draws every series as a polyline on shared axes and writes a PNG.
// Returns the number of curves drawn (empty series are skipped).
int render_plot(const std::vector<Series>& series, const std::string& title,
                const std::string& y_label, const std::string& png_path, int width = 800,
                int height = 500);

}  // namespace fasterx
