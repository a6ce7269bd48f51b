/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fasterx/assignment.hpp"
#include "fasterx/data.hpp"
#include "fasterx/model.hpp"

namespace fasterx {

// Per-image detections and ground truth; index = image id.
using ImageDetections = std::vector<std::vector<Detection>>;
using ImageTargets = std::vector<std::vector<GroundTruth>>;

std::vector<double> coco_iou_thresholds();  // 0.50, 0.55, ..., 0.95

struct EvalResult {
  double map = 0;   // mean over thresholds and classes
  double ap50 = 0;
  double ap75 = 0;
  // Empty when no class has ground truth in the bucket.
  std::optional<double> ap_small, ap_medium, ap_large;
  std::vector<double> ap_per_threshold;
  int classes_evaluated = 0;
  int num_gts = 0;
  int num_dets = 0;
};

// Score-ranked greedy matching per class (each GT matched at most once per
// threshold), 101-point interpolated precision. Classes without ground truth
// are left out of the mean. Bucketed APs ignore ground truth outside the
// bucket and unmatched detections whose area falls outside it.
EvalResult evaluate(const ImageDetections& dets, const ImageTargets& gts,
                    const std::vector<double>& thresholds = coco_iou_thresholds());

// AP of one class at one threshold (exposed for tests).
double average_precision_101(const std::vector<double>& recall, const std::vector<double>& precision);

// Detection dumps: "image_id class score x1 y1 x2 y2" per line.
void write_detections(std::ostream& out, const ImageDetections& dets);
ImageDetections read_detections(std::istream& in, const std::string& source = "<stream>");

std::string format_metrics(const EvalResult& r);

}  // namespace fasterx
