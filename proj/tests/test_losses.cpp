/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fasterx/losses.hpp"
#include "gradcheck.hpp"

using namespace fasterx;
using fasterx::testing::grad_check;
using fasterx::testing::randn;

namespace {

std::vector<HeadOutput> toy_outputs(const std::vector<Tensor>& in, const GridSpec& grid) {
  HeadOutput o;
  o.cls = in[0];
  o.reg = in[1];
  o.obj = in[2];
  o.grid = grid;
  return {o};
}

}  // namespace

TEST(Focal, ReferenceValues) {
  EXPECT_NEAR(focal_loss(0.3, 1), 0.14748666852992715, 1e-14);
  EXPECT_NEAR(focal_loss(0.3, 0), 0.02407555871586444, 1e-14);
  EXPECT_NEAR(focal_loss(0.9, 1), 0.00026340128914456557, 1e-16);
  EXPECT_NEAR(focal_loss(0.01, 0), 7.537751890126089e-07, 1e-18);
}

TEST(Focal, GammaZeroIsWeightedBce) {
  for (double p : {0.1, 0.5, 0.8}) {
    EXPECT_NEAR(focal_loss(p, 1, 0.0, 0.25), 0.25 * bce(p, 1), 1e-14);
    EXPECT_NEAR(focal_loss(p, 0, 0.0, 0.25), 0.75 * bce(p, 0), 1e-14);
  }
}

TEST(Focal, ScalarGradient) {
  const double h = 1e-7;
  for (double p : {0.02, 0.3, 0.5, 0.77, 0.97}) {
    for (int y : {0, 1}) {
      const double num = (focal_loss(p + h, y) - focal_loss(p - h, y)) / (2 * h);
      const double ana = focal_loss_grad(p, y);
      EXPECT_LT(std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-3}), 1e-6);
    }
  }
}

TEST(Focal, ClampedEndpointsAreFinite) {
  EXPECT_TRUE(std::isfinite(focal_loss(0.0, 1)));
  EXPECT_TRUE(std::isfinite(focal_loss(1.0, 0)));
  EXPECT_EQ(focal_loss_grad(0.0, 1), 0.0);
}

TEST(Focal, TensorGradient) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Tensor p({3, 5}), y({3, 5});
  for (int i = 0; i < 15; ++i) {
    p.data()[i] = u(rng);
    y.data()[i] = i % 3 == 0 ? 1.0 : 0.0;
  }
  auto r = grad_check([&](const std::vector<Tensor>& in) { return focal_loss(in[0], y); }, {p});
  EXPECT_LT(r.max_rel_err, 1e-5);
}

TEST(DetectionLoss, NoForegroundIsObjectnessOnly) {
  const GridSpec grid{8, 2, 2};
  Tensor cls({1, 2, 2, 2}, 0.3), reg({1, 4, 2, 2}, 0.0), obj({1, 1, 2, 2}, -1.0);
  AssignmentResult a;
  a.fg_mask.assign(4, 0);
  a.matched_gt.assign(4, -1);
  LossBundle lb = detection_loss(toy_outputs({cls, reg, obj}, grid), {a}, {{}});
  EXPECT_EQ(lb.num_fg, 0);
  EXPECT_EQ(lb.cls, 0.0);
  EXPECT_EQ(lb.reg, 0.0);
  EXPECT_NEAR(lb.obj, 4 * std::log1p(std::exp(-1.0)), 1e-12);
  EXPECT_DOUBLE_EQ(lb.total_value(), lb.obj);
}

TEST(DetectionLoss, GradientOnToyGrid) {
  std::mt19937_64 rng(2);
  const GridSpec grid{8, 4, 4};
  const int nc = 3, batch = 2;
  std::vector<Tensor> in = {randn({batch, nc, 4, 4}, rng), randn({batch, 4, 4, 4}, rng, 0.3),
                            randn({batch, 1, 4, 4}, rng)};
  const std::vector<std::vector<GroundTruth>> targets = {
      {{{4, 6, 20, 18}, 1}, {{18, 2, 30, 12}, 2}}, {{{8, 8, 26, 30}, 0}}};
  std::vector<AssignmentResult> assigns;
  for (int b = 0; b < batch; ++b) {
    assigns.push_back(simota_assign(make_candidates(toy_outputs(in, grid), b), targets[b], {}));
  }
  ASSERT_GT(assigns[0].num_fg + assigns[1].num_fg, 2);

  CiouAlphaFreeze freeze;
  auto r = grad_check(
      [&](const std::vector<Tensor>& x) {
        freeze.begin_eval();
        return detection_loss(toy_outputs(x, grid), assigns, targets).total;
      },
      in);
  EXPECT_LT(r.max_rel_err, 1e-4);
  EXPECT_EQ(r.checked, batch * 16 * (nc + 4 + 1));
}

TEST(DetectionLoss, RejectsMismatchedAssignments) {
  const GridSpec grid{8, 2, 2};
  Tensor cls({1, 2, 2, 2}), reg({1, 4, 2, 2}), obj({1, 1, 2, 2});
  AssignmentResult a;
  a.matched_gt.assign(3, -1);
  EXPECT_THROW(detection_loss(toy_outputs({cls, reg, obj}, grid), {a}, {{}}),
               std::invalid_argument);
  EXPECT_THROW(detection_loss(toy_outputs({cls, reg, obj}, grid), {}, {}), std::invalid_argument);
}

TEST(Distill, AlignmentIsMeanSquaredDifference) {
  Tensor a = Tensor::from_vector({1, 1, 1, 2}, {1, 2});
  Tensor b = Tensor::from_vector({1, 1, 1, 2}, {0, 0});
  Tensor c = Tensor::from_vector({1, 2, 1, 1}, {3, 0});
  Tensor d = Tensor::from_vector({1, 2, 1, 1}, {0, 0});
  EXPECT_DOUBLE_EQ(feature_alignment({a, c}, {b, d}).item(), (1 + 4 + 9 + 0) / 4.0);
  EXPECT_THROW(feature_alignment({a}, {c}), std::invalid_argument);
}

TEST(Distill, LambdaZeroIsExactSum) {
  std::mt19937_64 rng(3);
  LossBundle p, x;
  p.total = Tensor::scalar(1.2345678901234567, true);
  x.total = Tensor::scalar(0.1111111111111111, true);
  std::vector<Tensor> f1 = {randn({1, 2, 2, 2}, rng)}, f2 = {randn({1, 2, 2, 2}, rng)};
  EXPECT_EQ(distill_total(p, x, f1, f2, 0.0).item(), p.total.item() + x.total.item());
  const double lam = 0.7;
  EXPECT_DOUBLE_EQ(distill_total(p, x, f1, f2, lam).item(),
                   p.total.item() + x.total.item() + lam * feature_alignment(f1, f2).item());
}

TEST(Distill, AlignmentGradientReachesBothSides) {
  std::mt19937_64 rng(4);
  auto r = grad_check(
      [](const std::vector<Tensor>& in) { return feature_alignment({in[0]}, {in[1]}); },
      {randn({1, 2, 3, 3}, rng), randn({1, 2, 3, 3}, rng)});
  EXPECT_LT(r.max_rel_err, 1e-6);
}

namespace {

// Independent reference for the hand-built instance below.
double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double ref_focal(double p, int y) {
  const double pt = y ? p : 1 - p;
  const double at = y ? 0.25 : 0.75;
  return -at * (1 - pt) * (1 - pt) * std::log(pt);
}

double ref_ciou(double px1, double py1, double px2, double py2, double gx1, double gy1, double gx2,
                double gy2) {
  const double iw = std::max(0.0, std::min(px2, gx2) - std::max(px1, gx1));
  const double ih = std::max(0.0, std::min(py2, gy2) - std::max(py1, gy1));
  const double inter = iw * ih;
  const double uni = (px2 - px1) * (py2 - py1) + (gx2 - gx1) * (gy2 - gy1) - inter;
  const double iou = inter / uni;
  const double dx = (px1 + px2) / 2 - (gx1 + gx2) / 2, dy = (py1 + py2) / 2 - (gy1 + gy2) / 2;
  const double cw = std::max(px2, gx2) - std::min(px1, gx1), ch = std::max(py2, gy2) - std::min(py1, gy1);
  const double pi = std::acos(-1.0);
  const double v = 4 / (pi * pi) *
                   std::pow(std::atan((gx2 - gx1) / (gy2 - gy1)) - std::atan((px2 - px1) / (py2 - py1)), 2);
  const double alpha = v / ((1 - iou) + v);
  return 1 - iou + (dx * dx + dy * dy) / (cw * cw + ch * ch) + alpha * v;
}

}  // namespace

TEST(DetectionLoss, HandBuiltInstanceMatchesReference) {
  // 2x2 grid at stride 8, two classes, one GT claimed by locations 0 and 3.
  const GridSpec grid{8, 2, 2};
  const std::vector<double> cls_v = {0.4, -1.0, 2.0, 0.1, -0.5, 1.5, -2.0, 0.3};  // [c][i][j]
  const std::vector<double> reg_v = {0.5, 0.2, 0.7, 0.4,     // dx
                                     0.6, 0.3, 0.1, 0.45,    // dy
                                     0.2, -0.1, 0.0, 0.3,    // dw
                                     -0.2, 0.1, 0.25, 0.05};  // dh
  const std::vector<double> obj_v = {1.0, -0.5, -1.5, 0.8};
  Tensor cls = Tensor::from_vector({1, 2, 2, 2}, cls_v), reg = Tensor::from_vector({1, 4, 2, 2}, reg_v),
         obj = Tensor::from_vector({1, 1, 2, 2}, obj_v);
  const GroundTruth gt{{2, 3, 14, 13}, 1};
  AssignmentResult a;
  a.fg_mask = {1, 0, 0, 1};
  a.matched_gt = {0, -1, -1, 0};
  a.num_fg = 2;
  const LossBundle lb = detection_loss(toy_outputs({cls, reg, obj}, grid), {a}, {{gt}});

  double c = 0, r = 0, o = 0;
  for (int loc = 0; loc < 4; ++loc) {
    const int i = loc / 2, j = loc % 2;
    const bool fg = a.fg_mask[loc];
    const double z = obj_v[loc];
    o += std::max(z, 0.0) - z * (fg ? 1 : 0) + std::log1p(std::exp(-std::abs(z)));
    if (!fg) continue;
    for (int k = 0; k < 2; ++k) c += ref_focal(ref_sigmoid(cls_v[k * 4 + loc]), k == gt.cls);
    const double cx = (reg_v[loc] + j) * 8, cy = (reg_v[4 + loc] + i) * 8;
    const double w = std::exp(reg_v[8 + loc]) * 8, h = std::exp(reg_v[12 + loc]) * 8;
    r += ref_ciou(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2, gt.box.x1, gt.box.y1, gt.box.x2,
                  gt.box.y2);
  }
  c /= 2;
  r /= 2;
  o /= 2;
  EXPECT_NEAR(lb.cls, c, 1e-9);
  EXPECT_NEAR(lb.reg, r, 1e-9);
  EXPECT_NEAR(lb.obj, o, 1e-9);
  EXPECT_NEAR(lb.total_value(), c + 5 * r + o, 1e-9);
  EXPECT_EQ(lb.num_fg, 2);
}

TEST(DetectionLoss, InvariantToGtOrder) {
  std::mt19937_64 rng(12);
  const GridSpec grid{8, 4, 4};
  std::vector<Tensor> in = {randn({1, 3, 4, 4}, rng), randn({1, 4, 4, 4}, rng, 0.3),
                            randn({1, 1, 4, 4}, rng)};
  std::vector<GroundTruth> gts = {{{4, 6, 20, 18}, 1}, {{18, 2, 30, 12}, 2}, {{2, 20, 14, 31}, 0}};
  const auto outs = toy_outputs(in, grid);
  const double base =
      detection_loss(outs, {simota_assign(make_candidates(outs, 0), gts, {})}, {gts}).total_value();
  std::sort(gts.begin(), gts.end(), [](const GroundTruth& a, const GroundTruth& b) { return a.cls < b.cls; });
  do {
    const double v =
        detection_loss(outs, {simota_assign(make_candidates(outs, 0), gts, {})}, {gts}).total_value();
    EXPECT_NEAR(v, base, 1e-12);
  } while (std::next_permutation(gts.begin(), gts.end(),
                                 [](const GroundTruth& a, const GroundTruth& b) { return a.cls < b.cls; }));
}

TEST(Focal, DecreasingInProbabilityForPositives) {
  double prev = focal_loss(0.001, 1);
  for (int k = 2; k < 1000; ++k) {
    const double cur = focal_loss(k / 1000.0, 1);
    EXPECT_LT(cur, prev) << k;
    EXPECT_GE(cur, 0.0);
    prev = cur;
  }
}

TEST(Distill, AllOnesDifferenceWithLambdaTwo) {
  LossBundle p, x;
  p.total = Tensor::scalar(0.5);
  x.total = Tensor::scalar(0.25);
  std::vector<Tensor> f1 = {Tensor({1, 3, 2, 2}, 1.5), Tensor({1, 3, 1, 1}, 1.0)};
  std::vector<Tensor> f2 = {Tensor({1, 3, 2, 2}, 0.5), Tensor({1, 3, 1, 1}, 0.0)};
  EXPECT_EQ(feature_alignment(f1, f2).item(), 1.0);
  EXPECT_EQ(distill_total(p, x, f1, f2, 2.0).item(), 0.75 + 2.0);
  EXPECT_EQ(feature_alignment(f1, f1).item(), 0.0);
}

TEST(Distill, TotalNeverBelowComponentSum) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0, 3);
  for (int t = 0; t < 50; ++t) {
    LossBundle p, x;
    p.total = Tensor::scalar(u(rng));
    x.total = Tensor::scalar(u(rng));
    std::vector<Tensor> f1 = {randn({1, 2, 3, 3}, rng)}, f2 = {randn({1, 2, 3, 3}, rng)};
    EXPECT_GE(distill_total(p, x, f1, f2, u(rng)).item(), p.total.item() + x.total.item());
  }
}
