/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/assignment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "fasterx/losses.hpp"

namespace fasterx {

namespace {

std::atomic<uint64_t> g_invocations{0};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<int> admissible_of(const Matrix& cost, int g) {
  std::vector<int> idx;
  for (int c = 0; c < cost.cols; ++c) {
    if (std::isfinite(cost(g, c))) idx.push_back(c);
  }
  return idx;
}

std::vector<double> row(const Matrix& m, int r) {
  return {m.v.begin() + static_cast<int64_t>(r) * m.cols,
          m.v.begin() + static_cast<int64_t>(r + 1) * m.cols};
}

// Shared tail of the greedy and exhaustive paths: per-GT selections in,
// conflict-resolved assignment out.
AssignmentResult resolve(const Matrix& cost, const Matrix& ious,
                         const std::vector<std::vector<int>>& selected, std::vector<int> ks,
                         std::ostream* dump) {
  const int num_gt = cost.rows, n = cost.cols;
  AssignmentResult res;
  res.fg_mask.assign(n, 0);
  res.matched_gt.assign(n, -1);
  res.matched_iou.assign(n, 0.0);
  res.dynamic_k = std::move(ks);
  for (int g = 0; g < num_gt; ++g) {
    for (int c : selected[g]) {
      const int cur = res.matched_gt[c];
      // Lowest cost wins; equal cost keeps the lower GT index (visited first).
      if (cur < 0 || cost(g, c) < cost(cur, c)) res.matched_gt[c] = g;
    }
    if (res.dynamic_k[g] == 0) ++res.dropped_gts;
  }
  for (int c = 0; c < n; ++c) {
    if (res.matched_gt[c] >= 0) {
      res.fg_mask[c] = 1;
      res.matched_iou[c] = ious(res.matched_gt[c], c);
      ++res.num_fg;
    }
  }
  if (dump != nullptr) {
    for (int g = 0; g < num_gt; ++g) {
      std::vector<int> kept;
      for (int c : selected[g]) {
        if (res.matched_gt[c] == g) kept.push_back(c);
      }
      nlohmann::json line = {{"gt", g},
                             {"k", res.dynamic_k[g]},
                             {"selected", selected[g]},
                             {"kept", kept}};
      *dump << line.dump() << '\n';
    }
  }
  return res;
}

void check_matrices(const Matrix& cost, const Matrix& ious) {
  if (cost.rows != ious.rows || cost.cols != ious.cols) {
    throw std::invalid_argument("simota: cost and IoU matrices differ in shape");
  }
  for (double c : cost.v) {
    if (std::isnan(c)) throw std::invalid_argument("simota: NaN in cost matrix");
  }
}

// k for GT g over admissible IoUs, clamped to the admissible count.
int gt_k(const Matrix& cost, const Matrix& ious, int g, int q, int admissible) {
  if (admissible == 0) return 0;
  std::vector<double> v = row(ious, g);
  for (int c = 0; c < cost.cols; ++c) {
    if (!std::isfinite(cost(g, c))) v[c] = 0.0;
  }
  return std::min(dynamic_k(std::move(v), q), admissible);
}

}  // namespace

std::string to_string(CostMode m) { return m == CostMode::kImproved ? "improved" : "legacy"; }

CostMode parse_cost_mode(const std::string& s) {
  if (s == "improved" || s == "focal") return CostMode::kImproved;
  if (s == "legacy" || s == "bce") return CostMode::kLegacy;
  throw std::invalid_argument("unknown cost mode '" + s + "' (expected improved|legacy)");
}

CandidateSet make_candidates(const std::vector<HeadOutput>& outputs, int index) {
  CandidateSet cs;
  if (outputs.empty()) return cs;
  cs.num_classes = outputs[0].cls.dim(1);
  for (size_t l = 0; l < outputs.size(); ++l) {
    const HeadOutput& o = outputs[l];
    const GridSpec& gs = o.grid;
    if (index < 0 || index >= o.cls.dim(0)) throw std::out_of_range("make_candidates: bad index");
    if (o.cls.dim(1) != cs.num_classes) throw std::invalid_argument("make_candidates: class mismatch");
    const int64_t cells = gs.cells();
    const double* cls = o.cls.data().data() + index * cs.num_classes * cells;
    const double* reg = o.reg.data().data() + index * 4 * cells;
    const double* obj = o.obj.data().data() + index * cells;
    const double s = gs.stride;
    for (int64_t c = 0; c < cells; ++c) {
      const int i = static_cast<int>(c / gs.w), j = static_cast<int>(c % gs.w);
      cs.locations.push_back({static_cast<int>(l), i, j, gs.stride, (j + 0.5) * s, (i + 0.5) * s});
      cs.boxes.push_back({(reg[c] + j) * s, (reg[cells + c] + i) * s, std::exp(reg[2 * cells + c]) * s,
                          std::exp(reg[3 * cells + c]) * s});
      for (int k = 0; k < cs.num_classes; ++k) cs.cls_probs.push_back(sigmoid(cls[k * cells + c]));
      cs.obj_probs.push_back(sigmoid(obj[c]));
    }
  }
  return cs;
}

Matrix center_prior(const std::vector<Location>& locations, const std::vector<GroundTruth>& gts,
                    double radius) {
  const int n = static_cast<int>(locations.size());
  Matrix m(static_cast<int>(gts.size()), n);
  for (int g = 0; g < m.rows; ++g) {
    const Box& b = gts[g].box;
    const double gx = b.cx(), gy = b.cy();
    for (int c = 0; c < n; ++c) {
      const Location& loc = locations[c];
      const bool inside = loc.cx > b.x1 && loc.cx < b.x2 && loc.cy > b.y1 && loc.cy < b.y2;
      const double r = radius * loc.stride;
      const bool near = std::abs(loc.cx - gx) < r && std::abs(loc.cy - gy) < r;
      m(g, c) = (inside || near) ? 1.0 : 0.0;
    }
  }
  return m;
}

Matrix pair_ious(const CandidateSet& cands, const std::vector<GroundTruth>& gts,
                 const Matrix& prior) {
  const int n = static_cast<int>(cands.size());
  Matrix m(static_cast<int>(gts.size()), n);
  for (int g = 0; g < m.rows; ++g) {
    for (int c = 0; c < n; ++c) {
      if (prior(g, c) > 0) m(g, c) = iou(to_corners(cands.boxes[c]), gts[g].box);
    }
  }
  return m;
}

Matrix build_cost(const CandidateSet& cands, const std::vector<GroundTruth>& gts,
                  const Matrix& prior, const AssignConfig& cfg) {
  const int n = static_cast<int>(cands.size());
  const int nc = cands.num_classes;
  Matrix m(static_cast<int>(gts.size()), n, kInadmissible);
  for (int g = 0; g < m.rows; ++g) {
    const int label = gts[g].cls;
    if (label < 0 || label >= nc) throw std::invalid_argument("build_cost: GT class out of range");
    for (int c = 0; c < n; ++c) {
      if (prior(g, c) <= 0) continue;
      const Box pb = to_corners(cands.boxes[c]);
      double cls_cost = 0, reg_cost = 0;
      for (int k = 0; k < nc; ++k) {
        const double p = cands.cls_probs[static_cast<size_t>(c) * nc + k] * cands.obj_probs[c];
        const int y = k == label ? 1 : 0;
        cls_cost += cfg.cost == CostMode::kImproved ? focal_loss(p, y, cfg.focal_gamma, cfg.focal_alpha)
                                                    : bce(p, y);
      }
      if (cfg.cost == CostMode::kImproved) {
        reg_cost = ciou_loss(pb, gts[g].box);
      } else {
        reg_cost = -std::log(iou(pb, gts[g].box) + 1e-8);
      }
      m(g, c) = cls_cost + cfg.alpha * reg_cost;
    }
  }
  return m;
}

int dynamic_k(std::vector<double> ious, int q) {
  const int take = std::min<int>(q, static_cast<int>(ious.size()));
  if (take <= 0) return 1;
  std::partial_sort(ious.begin(), ious.begin() + take, ious.end(), std::greater<>());
  double s = 0;
  for (int i = 0; i < take; ++i) s += ious[i];
  return std::max(1, static_cast<int>(std::floor(s)));
}

AssignmentResult simota_from_matrices(const Matrix& cost, const Matrix& ious, int q,
                                      std::ostream* dump) {
  check_matrices(cost, ious);
  std::vector<std::vector<int>> selected(cost.rows);
  std::vector<int> ks(cost.rows, 0);
  for (int g = 0; g < cost.rows; ++g) {
    std::vector<int> adm = admissible_of(cost, g);
    ks[g] = gt_k(cost, ious, g, q, static_cast<int>(adm.size()));
    std::partial_sort(adm.begin(), adm.begin() + ks[g], adm.end(), [&](int a, int b) {
      const double ca = cost(g, a), cb = cost(g, b);
      return ca != cb ? ca < cb : a < b;
    });
    selected[g].assign(adm.begin(), adm.begin() + ks[g]);
  }
  return resolve(cost, ious, selected, std::move(ks), dump);
}

AssignmentResult simota_assign(const CandidateSet& cands, const std::vector<GroundTruth>& gts,
                               const AssignConfig& cfg, std::ostream* dump) {
  ++g_invocations;
  const Matrix prior = center_prior(cands.locations, gts, cfg.radius);
  const Matrix ious = pair_ious(cands, gts, prior);
  const Matrix cost = build_cost(cands, gts, prior, cfg);
  return simota_from_matrices(cost, ious, cfg.top_q, dump);
}

AssignmentResult simota_oracle(const Matrix& cost, const Matrix& ious, int q) {
  check_matrices(cost, ious);
  std::vector<std::vector<int>> selected(cost.rows);
  std::vector<int> ks(cost.rows, 0);
  for (int g = 0; g < cost.rows; ++g) {
    const std::vector<int> adm = admissible_of(cost, g);
    const int n = static_cast<int>(adm.size());
    const int k = gt_k(cost, ious, g, q, n);
    ks[g] = k;
    if (k == 0) continue;
    // Enumerate k-subsets of positions 0..n-1 in lexicographic order, so a
    // strictly smaller total is required to replace the incumbent.
    std::vector<int> pick(k);
    std::iota(pick.begin(), pick.end(), 0);
    double best = kInadmissible;
    std::vector<int> best_pick;
    while (true) {
      double total = 0;
      for (int p : pick) total += cost(g, adm[p]);
      if (best_pick.empty() || total < best) {
        best = total;
        best_pick = pick;
      }
      int i = k - 1;
      while (i >= 0 && pick[i] == n - k + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    for (int p : best_pick) selected[g].push_back(adm[p]);
  }
  return resolve(cost, ious, selected, std::move(ks), nullptr);
}

uint64_t simota_invocations() { return g_invocations.load(); }
void reset_simota_invocations() { g_invocations = 0; }

}  // namespace fasterx
