/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fasterx {

namespace {

// Threshold comparisons tolerate rounding in the IoU itself, so a box pair at
// exactly 0.6 counts at the 0.60 threshold.
constexpr double kIouSlack = 1e-9;

struct ClassDet {
  int image;
  Detection det;
};

bool ranked_before(const ClassDet& a, const ClassDet& b) {
  if (a.det.score != b.det.score) return a.det.score > b.det.score;
  if (a.image != b.image) return a.image < b.image;
  const Box& p = a.det.box;
  const Box& q = b.det.box;
  if (p.x1 != q.x1) return p.x1 < q.x1;
  if (p.y1 != q.y1) return p.y1 < q.y1;
  if (p.x2 != q.x2) return p.x2 < q.x2;
  return p.y2 < q.y2;
}

enum class Range { kAll, kSmall, kMedium, kLarge };

bool in_range(double area, Range r) {
  switch (r) {
    case Range::kAll: return true;
    case Range::kSmall: return size_bucket(area) == SizeBucket::kSmall;
    case Range::kMedium: return size_bucket(area) == SizeBucket::kMedium;
    case Range::kLarge: return size_bucket(area) == SizeBucket::kLarge;
  }
  return false;
}

// AP for one class / threshold / range; nullopt when the class has no GT there.
std::optional<double> class_ap(const std::vector<ClassDet>& ranked,
                               const std::vector<std::vector<Box>>& gt_by_image, double thr,
                               Range range) {
  std::vector<std::vector<char>> ignored(gt_by_image.size());
  int npos = 0;
  for (size_t i = 0; i < gt_by_image.size(); ++i) {
    for (const Box& g : gt_by_image[i]) {
      const bool ig = !in_range(g.area(), range);
      ignored[i].push_back(ig);
      npos += !ig;
    }
  }
  if (npos == 0) return std::nullopt;
  std::vector<std::vector<char>> used(gt_by_image.size());
  for (size_t i = 0; i < gt_by_image.size(); ++i) used[i].assign(gt_by_image[i].size(), 0);

  std::vector<double> recall, precision;
  int tp = 0, fp = 0;
  for (const ClassDet& d : ranked) {
    const auto& gts = gt_by_image[d.image];
    // Prefer the best unmatched in-range GT; fall back to an ignored one.
    int best = -1;
    bool best_ignored = true;
    double best_iou = thr - kIouSlack;
    for (size_t k = 0; k < gts.size(); ++k) {
      if (used[d.image][k]) continue;
      const bool ig = ignored[d.image][k];
      if (!best_ignored && ig) continue;
      const double v = iou(d.det.box, gts[k]);
      if (v < thr - kIouSlack) continue;
      if ((best_ignored && !ig) || v > best_iou || best < 0) {
        best = static_cast<int>(k);
        best_iou = v;
        best_ignored = ig;
      }
    }
    if (best >= 0) {
      used[d.image][best] = 1;
      if (best_ignored) continue;
      ++tp;
    } else {
      if (!in_range(d.det.box.area(), range)) continue;
      ++fp;
    }
    recall.push_back(static_cast<double>(tp) / npos);
    precision.push_back(static_cast<double>(tp) / (tp + fp));
  }
  return average_precision_101(recall, precision);
}

}  // namespace

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

double average_precision_101(const std::vector<double>& recall,
                             const std::vector<double>& precision) {
  if (recall.size() != precision.size()) throw std::invalid_argument("ap: size mismatch");
  std::vector<double> env(precision);
  for (int i = static_cast<int>(env.size()) - 2; i >= 0; --i) env[i] = std::max(env[i], env[i + 1]);
  double sum = 0;
  size_t j = 0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    while (j < recall.size() && recall[j] < r - 1e-12) ++j;
    if (j == recall.size()) break;
    sum += env[j];
  }
  return sum / 101.0;
}

EvalResult evaluate(const ImageDetections& dets, const ImageTargets& gts,
                    const std::vector<double>& thresholds) {
  if (thresholds.empty()) throw std::invalid_argument("evaluate: no IoU thresholds");
  if (dets.size() > gts.size()) {
    throw std::invalid_argument("evaluate: detections for " + std::to_string(dets.size()) +
                                " images but ground truth for " + std::to_string(gts.size()));
  }
  EvalResult res;
  const int n_images = static_cast<int>(gts.size());
  std::map<int, std::vector<std::vector<Box>>> gt_by_class;
  for (int i = 0; i < n_images; ++i) {
    for (const auto& g : gts[i]) {
      auto& per = gt_by_class[g.cls];
      per.resize(n_images);
      per[i].push_back(g.box);
      ++res.num_gts;
    }
  }
  std::map<int, std::vector<ClassDet>> det_by_class;
  for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
    for (const auto& d : dets[i]) {
      if (!std::isfinite(d.score) || !std::isfinite(d.box.x1) || !std::isfinite(d.box.y1) ||
          !std::isfinite(d.box.x2) || !std::isfinite(d.box.y2)) {
        throw std::invalid_argument("evaluate: non-finite detection");
      }
      det_by_class[d.cls].push_back({i, d});
      ++res.num_dets;
    }
  }
  for (auto& [c, v] : det_by_class) std::sort(v.begin(), v.end(), ranked_before);

  const std::vector<ClassDet> none;
  auto mean_ap = [&](Range range, std::vector<double>* per_thr) -> std::optional<double> {
    double total = 0;
    int count = 0;
    if (per_thr) per_thr->assign(thresholds.size(), 0.0);
    for (size_t t = 0; t < thresholds.size(); ++t) {
      double sum_t = 0;
      int n_t = 0;
      for (const auto& [c, g] : gt_by_class) {
        auto it = det_by_class.find(c);
        const auto ap = class_ap(it == det_by_class.end() ? none : it->second, g, thresholds[t], range);
        if (!ap) continue;
        sum_t += *ap;
        ++n_t;
      }
      if (n_t == 0) return std::nullopt;
      if (per_thr) (*per_thr)[t] = sum_t / n_t;
      total += sum_t / n_t;
      ++count;
    }
    return total / count;
  };

  res.classes_evaluated = static_cast<int>(gt_by_class.size());
  if (res.classes_evaluated == 0) {
    res.ap_per_threshold.assign(thresholds.size(), 0.0);
    return res;
  }
  res.map = *mean_ap(Range::kAll, &res.ap_per_threshold);
  for (size_t t = 0; t < thresholds.size(); ++t) {
    if (std::abs(thresholds[t] - 0.50) < 1e-12) res.ap50 = res.ap_per_threshold[t];
    if (std::abs(thresholds[t] - 0.75) < 1e-12) res.ap75 = res.ap_per_threshold[t];
  }
  res.ap_small = mean_ap(Range::kSmall, nullptr);
  res.ap_medium = mean_ap(Range::kMedium, nullptr);
  res.ap_large = mean_ap(Range::kLarge, nullptr);
  return res;
}

void write_detections(std::ostream& out, const ImageDetections& dets) {
  std::ostringstream line;
  for (size_t i = 0; i < dets.size(); ++i) {
    for (const auto& d : dets[i]) {
      line.str("");
      line << std::setprecision(17) << i << ' ' << d.cls << ' ' << d.score << ' ' << d.box.x1 << ' '
           << d.box.y1 << ' ' << d.box.x2 << ' ' << d.box.y2 << '\n';
      out << line.str();
    }
  }
}

ImageDetections read_detections(std::istream& in, const std::string& source) {
  ImageDetections out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ss(line);
    long image = -1;
    Detection d;
    if (!(ss >> image >> d.cls >> d.score >> d.box.x1 >> d.box.y1 >> d.box.x2 >> d.box.y2) ||
        image < 0 || d.cls < 0) {
      throw std::runtime_error(source + ":" + std::to_string(lineno) +
                               ": expected 'image_id class score x1 y1 x2 y2'");
    }
    if (static_cast<size_t>(image) >= out.size()) out.resize(image + 1);
    out[image].push_back(d);
  }
  return out;
}

std::string format_metrics(const EvalResult& r) {
  std::ostringstream s;
  auto opt = [](const std::optional<double>& v) {
    std::ostringstream o;
    if (v) {
      o << std::fixed << std::setprecision(4) << *v;
    } else {
      o << "n/a";
    }
    return o.str();
  };
  s << std::fixed << std::setprecision(4) << "mAP=" << r.map << " AP50=" << r.ap50
    << " AP75=" << r.ap75 << " AP_S=" << opt(r.ap_small) << " AP_M=" << opt(r.ap_medium)
    << " AP_L=" << opt(r.ap_large) << " (classes=" << r.classes_evaluated << " gts=" << r.num_gts
    << " dets=" << r.num_dets << ")";
  return s.str();
}

}  // namespace fasterx
