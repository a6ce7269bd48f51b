/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "fasterx/geometry.hpp"
#include "fasterx/heads.hpp"

namespace fasterx {

inline constexpr double kInadmissible = std::numeric_limits<double>::infinity();

struct GroundTruth {
  Box box;
  int cls = 0;
};

struct Location {
  int level = 0;
  int i = 0, j = 0;
  int stride = 0;
  double cx = 0, cy = 0;  // cell center in image pixels
};

// Per-image detached predictions over every location of every level.
struct CandidateSet {
  int num_classes = 0;
  std::vector<Location> locations;
  std::vector<CenterBox> boxes;
  std::vector<double> cls_probs;  // [n, num_classes]
  std::vector<double> obj_probs;  // [n]

  size_t size() const { return locations.size(); }
};

// Builds the candidate set of image `index` from raw head outputs (sigmoid
// probabilities, decoded boxes). Location order is level-major, then
// row-major within a level.
CandidateSet make_candidates(const std::vector<HeadOutput>& outputs, int index);

enum class CostMode { kImproved, kLegacy };
std::string to_string(CostMode m);
CostMode parse_cost_mode(const std::string& s);

struct AssignConfig {
  CostMode cost = CostMode::kImproved;
  double alpha = 3.0;         // regression weight in the cost
  double radius = 2.5;        // center prior radius in strides
  int top_q = 10;             // IoUs summed for dynamic k
  double focal_gamma = 2.0;
  double focal_alpha = 0.25;
};

// Dense [rows x cols] row-major matrix.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> v;
  Matrix() = default;
  Matrix(int r, int c, double fill = 0) : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}
  double& operator()(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
};

// 1 where the location center lies inside the GT box or within
// radius * stride of the GT center (per axis), else 0. [num_gt x n].
Matrix center_prior(const std::vector<Location>& locations, const std::vector<GroundTruth>& gts,
                    double radius);

// IoU between every GT and candidate box, 0 for inadmissible pairs.
Matrix pair_ious(const CandidateSet& cands, const std::vector<GroundTruth>& gts,
                 const Matrix& prior);

// Improved: sum_c focal(cls_c * obj, onehot_c) + alpha * ciou_loss.
// Legacy: sum_c bce(cls_c * obj, onehot_c) + alpha * -log(IoU + 1e-8).
// Inadmissible pairs cost +inf.
Matrix build_cost(const CandidateSet& cands, const std::vector<GroundTruth>& gts,
                  const Matrix& prior, const AssignConfig& cfg);

// max(1, floor(sum of the top min(q, n) values)).
int dynamic_k(std::vector<double> ious, int q);

struct AssignmentResult {
  std::vector<char> fg_mask;     // per candidate
  std::vector<int> matched_gt;   // per candidate, -1 for background
  std::vector<int> dynamic_k;    // per GT; 0 for GTs with no admissible candidate
  std::vector<double> matched_iou;  // per candidate, IoU with its GT (0 for background)
  int num_fg = 0;
  int dropped_gts = 0;
};

// Each GT takes its k lowest-cost admissible candidates (ties: lower index).
// A candidate claimed by several GTs keeps the claimant with the lowest cost
// (ties: lower GT index). Optionally writes one JSON line per GT to `dump`.
AssignmentResult simota_assign(const CandidateSet& cands, const std::vector<GroundTruth>& gts,
                               const AssignConfig& cfg, std::ostream* dump = nullptr);

// Same decision from precomputed matrices.
AssignmentResult simota_from_matrices(const Matrix& cost, const Matrix& ious, int q,
                                      std::ostream* dump = nullptr);

// Exhaustive reference: enumerates every k-subset of admissible candidates
// per GT and keeps the minimum total cost (ties: lexicographically smallest
// index set), then resolves conflicts. For small instances only.
AssignmentResult simota_oracle(const Matrix& cost, const Matrix& ious, int q);

// Process-wide count of simota_assign invocations (instrumentation).
uint64_t simota_invocations();
void reset_simota_invocations();

}  // namespace fasterx
