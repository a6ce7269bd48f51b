/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
// Acceptance suite: one PASS/FAIL line per criterion.
//
//   fasterx_acceptance [--only N[,M...]] [--artifacts DIR]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "fasterx/distill.hpp"
#include "fasterx/eval.hpp"
#include "fasterx/profiler.hpp"
#include "fasterx/train.hpp"
#include "gradcheck.hpp"

namespace fs = std::filesystem;
using namespace fasterx;
using fasterx::testing::grad_check;
using fasterx::testing::probe;
using fasterx::testing::randn;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path g_artifacts = "acceptance_artifacts";

bool same_data(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

// --- 1 -------------------------------------------------------------------------------

Outcome c1_focus_roundtrip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> n(1, 3), c(1, 8), hw(1, 8);
  int ok = 0;
  for (int t = 0; t < 200; ++t) {
    const Tensor x = randn({n(rng), c(rng), 2 * hw(rng), 2 * hw(rng)}, rng);
    const Tensor y = randn({n(rng), 4 * c(rng), hw(rng), hw(rng)}, rng);
    ok += same_data(ops::pixel_shuffle(ops::focus(x, 2), 2), x) &&
          same_data(ops::focus(ops::pixel_shuffle(y, 2), 2), y);
  }
  const double s = seconds_since(t0);
  return {ok == 200 && s < 10.0, fmt("%d/200 exact in both directions, %.2f s (limit 10 s)", ok, s)};
}

// --- 2 -------------------------------------------------------------------------------

Outcome c2_gradients() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2);
  Rng mrng(2);
  std::vector<std::pair<std::string, double>> errs;
  auto block = [&](Block& m, const Tensor& x) {
    std::vector<Tensor> in = {x};
    for (const Tensor& p : m.parameters()) in.push_back(p);
    return grad_check([&](const std::vector<Tensor>& v) { return probe(m.forward(v[0])); }, in).max_rel_err;
  };

  {
    const int m = 16;
    Tensor pred({m, 4}), gt({m, 4});
    std::uniform_real_distribution<double> pos(0, 40), size(2, 20);
    for (int i = 0; i < m; ++i) {
      const double v[8] = {pos(rng), pos(rng), size(rng), size(rng), pos(rng), pos(rng), size(rng), size(rng)};
      for (int k = 0; k < 4; ++k) {
        pred.data()[4 * i + k] = v[k];
        gt.data()[4 * i + k] = v[4 + k];
      }
    }
    // Alpha is a constant in the analytic gradient; finite differences see
    // the same function by replaying the alphas of the base evaluation.
    CiouAlphaFreeze freeze;
    errs.emplace_back("ciou_loss", grad_check(
                                       [&](const std::vector<Tensor>& in) {
                                         freeze.begin_eval();
                                         return probe(ciou_loss(in[0], gt));
                                       },
                                       {pred})
                                       .max_rel_err);
  }
  {
    std::uniform_real_distribution<double> u(0.05, 0.95);
    Tensor p({4, 8}), y({4, 8});
    for (int i = 0; i < 32; ++i) {
      p.data()[i] = u(rng);
      y.data()[i] = i % 4 == 0;
    }
    errs.emplace_back("focal_loss",
                      grad_check([&](const std::vector<Tensor>& in) { return focal_loss(in[0], y); }, {p}).max_rel_err);
  }
  {
    const GridSpec grid{8, 8, 8};
    errs.emplace_back("decode", grad_check([&](const std::vector<Tensor>& in) { return probe(decode(in[0], grid)); },
                                           {randn({1, 4, 8, 8}, rng, 0.5)})
                                    .max_rel_err);
  }
  {
    DSConv m({.in = 4, .out = 6, .kernel = 3, .stride = 1}, mrng);
    errs.emplace_back("ds_conv", block(m, randn({2, 4, 8, 8}, rng)));
  }
  {
    GhostModule m(6, 8, 2, mrng);
    errs.emplace_back("ghost_module", block(m, randn({2, 6, 8, 8}, rng)));
  }
  {
    CBAM m(16, mrng);
    errs.emplace_back("cbam", block(m, randn({2, 16, 8, 8}, rng)));
  }
  {
    HeadConfig cfg;
    cfg.mode = HeadMode::kDSPixSF;
    cfg.attention = true;
    cfg.hidden = 16;
    cfg.num_classes = 3;
    auto head = make_head(4, cfg, mrng);
    std::vector<Tensor> in = {randn({2, 4, 8, 8}, rng)};
    for (const Tensor& p : head->parameters()) in.push_back(p);
    errs.emplace_back("pixsf_head",
                      grad_check(
                          [&](const std::vector<Tensor>& v) {
                            HeadOutput o = head->forward(v[0], 8);
                            return ops::add(ops::add(probe(o.cls, 1), probe(o.reg, 2)), probe(o.obj, 3));
                          },
                          in)
                          .max_rel_err);
  }
  const double s = seconds_since(t0);
  bool pass = s < 120.0;
  std::string detail;
  for (const auto& [name, e] : errs) {
    pass &= e < 1e-4;
    detail += fmt("%s %.1e, ", name.c_str(), e);
  }
  return {pass, detail + fmt("%.1f s (limits: rel err < 1e-4, 120 s)", s)};
}

// --- 3 -------------------------------------------------------------------------------

Outcome c3_simota_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> ngt(1, 3), ncand(1, 20), tie(0, 12);
  std::uniform_real_distribution<double> u(0, 1), pos(0, 64), size(3, 30);
  int agree = 0, with_conflict = 0, with_ties = 0;
  for (int t = 0; t < 500; ++t) {
    // Candidates scattered over a 64 x 64 image at strides 8 and 16 with
    // random predictions; half the instances snap costs to a coarse grid so
    // ties occur.
    const int g = ngt(rng), n = ncand(rng);
    std::vector<GroundTruth> gts;
    for (int k = 0; k < g; ++k) {
      const double x = pos(rng) * 0.8, y = pos(rng) * 0.8;
      gts.push_back({{x, y, x + size(rng), y + size(rng)}, static_cast<int>(u(rng) * 3)});
    }
    CandidateSet cs;
    cs.num_classes = 3;
    for (int c = 0; c < n; ++c) {
      const int s = u(rng) < 0.5 ? 8 : 16;
      const int cells = 64 / s;
      Location l{s == 8 ? 0 : 1, static_cast<int>(u(rng) * cells), static_cast<int>(u(rng) * cells), s, 0, 0};
      l.cx = (l.j + 0.5) * s;
      l.cy = (l.i + 0.5) * s;
      cs.locations.push_back(l);
      cs.boxes.push_back({l.cx + (u(rng) - 0.5) * s, l.cy + (u(rng) - 0.5) * s, size(rng), size(rng)});
      for (int k = 0; k < 3; ++k) cs.cls_probs.push_back(u(rng));
      cs.obj_probs.push_back(u(rng));
    }
    AssignConfig cfg;
    const Matrix prior = center_prior(cs.locations, gts, cfg.radius);
    const Matrix ious = pair_ious(cs, gts, prior);
    Matrix cost = build_cost(cs, gts, prior, cfg);
    AssignmentResult fast;
    if (t % 2 == 0) {
      fast = simota_assign(cs, gts, cfg);
    } else {
      for (double& v : cost.v) {
        if (std::isfinite(v)) v = tie(rng) * 0.25;
      }
      fast = simota_from_matrices(cost, ious, cfg.top_q);
      ++with_ties;
    }
    const AssignmentResult ref = simota_oracle(cost, ious, cfg.top_q);
    agree += fast.matched_gt == ref.matched_gt && fast.fg_mask == ref.fg_mask &&
             fast.dynamic_k == ref.dynamic_k && fast.num_fg == ref.num_fg;
    int claims = 0;
    for (int k : ref.dynamic_k) claims += k;
    with_conflict += claims > ref.num_fg;
  }
  const double s = seconds_since(t0);
  return {agree == 500 && s < 60.0,
          fmt("%d/500 identical (%d with conflicts, %d with forced ties), %.2f s (limit 60 s)", agree, with_conflict,
              with_ties, s)};
}

// --- 4 -------------------------------------------------------------------------------

CostReport profile_of(const std::string& preset, int size = 0) {
  ModelConfig c = ModelConfig::preset(preset);
  if (size > 0) c.input_size = size;
  Detector m(c, 0);
  return profile_model(m, c.input_size);
}

Outcome c4_accounting() {
  struct Target {
    const char* preset;
    double params_m, gflops, tol;
  };
  const Target targets[] = {{"yolox-s", 9.0, 26.8, 0.10},
                            {"fasterx-s", 5.19, 19.20, 0.15},
                            {"fasterx-tiny", 2.93, 5.39, 0.15},
                            {"fasterx-nano", 0.70, 1.43, 0.15}};
  bool pass = true;
  std::string detail;
  for (const auto& t : targets) {
    const CostReport r = profile_of(t.preset);
    const double dp = r.params_m() / t.params_m - 1, df = r.gflops() / t.gflops - 1;
    const bool ok = std::abs(dp) <= t.tol && std::abs(df) <= t.tol;
    pass &= ok;
    detail += fmt("%s@%d %.3fM(%+.1f%%)/%.2fG(%+.1f%%)%s; ", t.preset, r.input_size, r.params_m(), 100 * dp,
                  r.gflops(), 100 * df, ok ? "" : " OUT");
  }
  for (const char* p : {"s", "tiny", "nano"}) {
    const CostReport fx = profile_of(std::string("fasterx-") + p);
    const CostReport base = profile_of(std::string("yolox-") + p + "-p4", fx.input_size);
    const bool ok = fx.params < base.params && fx.flop_units < base.flop_units;
    pass &= ok;
    detail += fmt("fasterx-%s<yolox-%s-p4 %s; ", p, p, ok ? "yes" : "NO");
  }
  return {pass, detail};
}

// --- 5 -------------------------------------------------------------------------------

Outcome c5_ablation_ordering() {
  auto params = [](const std::string& neck, const std::string& head) {
    ModelConfig c = ModelConfig::preset("fasterx-s");
    c.set("neck", neck);
    c.set("head", head);
    c.heads = 4;
    c.attention = false;
    Detector m(c, 0);
    return count_params(m);
  };
  const int64_t pan_conv = params("pafpn", "plain"), pan_ds = params("pafpn", "ds"),
                slim_ds = params("slimfpn", "ds"), slim_pix = params("slimfpn", "pixsf"),
                slim_dspix = params("slimfpn", "ds+pixsf");
  const bool pass = pan_conv > pan_ds && pan_ds > slim_ds && slim_pix > slim_dspix;
  return {pass, fmt("PANet/Conv+P4 %.3fM > PANet/DS %.3fM > Slim/DS %.3fM; Slim/PixSF %.3fM > Slim/DS+PixSF %.3fM",
                    pan_conv / 1e6, pan_ds / 1e6, slim_ds / 1e6, slim_pix / 1e6, slim_dspix / 1e6)};
}

// --- 6 -------------------------------------------------------------------------------

Outcome c6_evaluator() {
  const ImageTargets one_gt = {{{{0, 0, 10, 10}, 0}}};
  const ImageDetections one_det = {{{{0, 0, 10, 6}, 0, 0.9}}};
  const EvalResult r = evaluate(one_det, one_gt);
  bool pass = r.ap50 == 1.0 && r.map == 0.3;

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(0, 100), size(4, 40), u(0, 1), jit(-4, 4);
  std::uniform_int_distribution<int> cls(0, 2), cnt(0, 5);
  int invariant = 0, bounded = 0;
  for (int t = 0; t < 100; ++t) {
    ImageTargets gts(4);
    ImageDetections dets(4);
    for (int i = 0; i < 4; ++i) {
      for (int k = cnt(rng); k > 0; --k) {
        const double x = pos(rng), y = pos(rng);
        const Box b{x, y, x + size(rng), y + size(rng)};
        gts[i].push_back({b, cls(rng)});
        if (u(rng) < 0.8) {
          dets[i].push_back(
              {{b.x1 + jit(rng), b.y1 + jit(rng), b.x2 + jit(rng), b.y2 + jit(rng)}, gts[i].back().cls, u(rng)});
        }
      }
      for (int k = cnt(rng); k > 0; --k) {
        const double x = pos(rng), y = pos(rng);
        dets[i].push_back({{x, y, x + size(rng), y + size(rng)}, cls(rng), u(rng)});
      }
    }
    const EvalResult a = evaluate(dets, gts);
    for (auto& d : dets) std::shuffle(d.begin(), d.end(), rng);
    const EvalResult b = evaluate(dets, gts);
    invariant += a.map == b.map && a.ap50 == b.ap50 && a.ap_small == b.ap_small && a.ap_medium == b.ap_medium &&
                 a.ap_large == b.ap_large;
    bool in = true;
    for (double v : {a.map, a.ap50, a.ap75, a.ap_small.value_or(0), a.ap_medium.value_or(0), a.ap_large.value_or(0)}) {
      in &= v >= 0.0 && v <= 1.0;
    }
    bounded += in;
  }
  pass &= invariant == 100 && bounded == 100;
  return {pass, fmt("single GT at IoU 0.6: AP50=%.17g mAP=%.17g; order-invariant %d/100, bounded %d/100", r.ap50,
                    r.map, invariant, bounded)};
}

// --- 7 -------------------------------------------------------------------------------

Outcome c7_learnability() {
  const auto t0 = Clock::now();
  tune_allocator();
  RunConfig cfg = RunConfig::resolve({{"model.preset", "fasterx-nano"}, {"model.input_size", "128"},
                                      {"train.epochs", "30"}, {"data.synth_train_images", "500"},
                                      {"data.synth_val_images", "100"}, {"train.seed", "0"}});
  cfg.run_dir = (g_artifacts / "c7_nano").string();
  Trainer trainer(cfg, load_split(cfg.data, false, cfg.model.num_classes),
                  load_split(cfg.data, true, cfg.model.num_classes));
  const auto logs = trainer.fit();
  const double s = seconds_since(t0);
  const EvalResult& r = *logs.back().eval;
  return {r.ap50 >= 0.5 && s <= 1800.0,
          fmt("held-out AP50 %.4f (need >= 0.5), mAP %.4f, AP_S %.4f, %.0f s (limit 1800 s)", r.ap50, r.map,
              r.ap_small.value_or(-1), s)};
}

// --- 8 -------------------------------------------------------------------------------

Outcome c8_four_heads() {
  const auto t0 = Clock::now();
  tune_allocator();
  int wins = 0;
  std::string detail;
  std::vector<std::string> logs, labels;
  for (int seed = 0; seed < 3; ++seed) {
    double ap[2] = {0, 0};
    for (int heads : {3, 4}) {
      RunConfig cfg = RunConfig::resolve({{"model.preset", "fasterx-nano"},
                                          {"model.input_size", "128"},
                                          {"model.heads", std::to_string(heads)},
                                          {"train.epochs", "20"},
                                          {"train.eval_every", "5"},
                                          {"train.seed", std::to_string(seed)},
                                          {"data.synth_train_images", "300"},
                                          {"data.synth_val_images", "100"},
                                          {"data.synth_seed", std::to_string(100 + seed)}});
      cfg.run_dir = (g_artifacts / "c8" / fmt("heads%d_seed%d", heads, seed)).string();
      Trainer trainer(cfg, load_split(cfg.data, false, cfg.model.num_classes),
                      load_split(cfg.data, true, cfg.model.num_classes));
      ap[heads - 3] = trainer.fit().back().eval->ap50;
      logs.push_back((fs::path(cfg.run_dir) / "log.jsonl").string());
      labels.push_back(fmt("%d-head s%d", heads, seed));
    }
    wins += ap[1] >= ap[0];
    detail += fmt("seed %d: 4-head %.4f vs 3-head %.4f; ", seed, ap[1], ap[0]);
  }
  // Curves through the command-line plot path.
  std::string cmd = std::string(FASTERX_CLI) + " plot --out " + (g_artifacts / "c8").string();
  for (size_t i = 0; i < logs.size(); ++i) cmd += " --log " + logs[i] + " --label '" + labels[i] + "'";
  cmd += " --metric AP50 --metric mAP > /dev/null";
  const bool plotted = std::system(cmd.c_str()) == 0 && fs::exists(g_artifacts / "c8" / "AP50.png");
  const double s = seconds_since(t0);
  return {wins >= 2 && plotted, detail + fmt("4-head >= 3-head in %d/3 seeds, curves %s, %.0f s", wins,
                                             plotted ? "written to c8/AP50.png" : "MISSING", s)};
}

// --- 9 -------------------------------------------------------------------------------

Outcome c9_distillation() {
  const auto t0 = Clock::now();
  RunConfig cfg = RunConfig::resolve({{"model.preset", "fasterx-nano"},
                                      {"model.input_size", "64"},
                                      {"distill.enabled", "true"},
                                      {"distill.warmup_epochs", "2"},
                                      {"distill.lambda", "1.0"},
                                      {"train.epochs", "4"},
                                      {"train.batch_size", "4"},
                                      {"train.eval_every", "0"},
                                      {"data.synth_image_size", "64"},
                                      {"data.synth_train_images", "16"},
                                      {"data.synth_val_images", "0"}});
  cfg.run_dir = (g_artifacts / "c9_distill").string();
  Trainer trainer(cfg, load_split(cfg.data, false, cfg.model.num_classes), {});
  const auto logs = trainer.fit();
  const uint64_t imgs = static_cast<uint64_t>(trainer.steps_per_epoch()) * cfg.train.batch_size;
  bool counts = logs.size() == 4;
  std::string calls;
  for (const auto& l : logs) {
    const bool joint = l.epoch < 2;
    counts &= l.assign_calls == (joint ? 2 : 1) * imgs;
    counts &= l.phase == (joint ? TrainPhase::kJoint : TrainPhase::kGuided);
    calls += fmt("%s%llu", calls.empty() ? "" : "/", static_cast<unsigned long long>(l.assign_calls));
  }

  // One shared assignment object in the guided phase.
  Detector& m = trainer.model();
  auto [images, targets] = trainer.batch(3, 0);
  const StepResult guided = training_step(m, images, targets, 3, cfg.assign, cfg.loss);
  const bool shared = guided.student_assign.get() == guided.aux_assign.get() &&
                      guided.assign_calls == targets.size();

  // Stripped inference model is bit-identical in eval mode.
  m.train(false);
  auto stripped = strip_aux(m);
  stripped->train(false);
  bool identical = true;
  {
    NoGradGuard ng;
    const auto a = m.forward(images);
    const auto b = stripped->forward(images);
    for (size_t i = 0; i < a.size(); ++i) {
      identical &= same_data(a[i].cls, b[i].cls) && same_data(a[i].reg, b[i].reg) && same_data(a[i].obj, b[i].obj);
    }
  }
  const bool fewer = stripped->num_parameters() < m.num_parameters();

  // Lambda = 0 gives the exact component sum.
  RunConfig zero = cfg;
  zero.model.distill.lambda = 0.0;
  Detector z(zero.model, 9);
  copy_state(m, z);
  z.train(true);
  bool exact = true;
  for (int epoch : {0, 3}) {
    const StepResult r = training_step(z, images, targets, epoch, cfg.assign, cfg.loss);
    exact &= r.loss.item() == r.student.total_value() + r.aux->total_value();
  }
  const double s = seconds_since(t0);
  return {counts && shared && identical && fewer && exact,
          fmt("assign calls per epoch %s for %llu images (want 2x,2x,1x,1x) %s; guided assignment shared %s; "
              "strip_aux bit-identical %s (%lld -> %lld params); lambda=0 exact sum %s; %.0f s",
              calls.c_str(), static_cast<unsigned long long>(imgs), counts ? "ok" : "WRONG", shared ? "yes" : "NO",
              identical ? "yes" : "NO", static_cast<long long>(m.num_parameters()),
              static_cast<long long>(stripped->num_parameters()), exact ? "yes" : "NO", s)};
}

// --- 10 ------------------------------------------------------------------------------

Outcome c10_roundtrips() {
  const auto t0 = Clock::now();
  fs::create_directories(g_artifacts / "c10");

  // Checkpoint: parameters, buffers and optimizer state.
  ModelConfig mc = ModelConfig::preset("fasterx-nano");
  mc.input_size = 64;
  mc.distill.enabled = true;
  Detector m(mc, 10);
  std::mt19937_64 rng(10);
  m.train(true);
  m.forward(randn({2, 3, 64, 64}, rng));
  TrainState st;
  st.epoch = 3;
  st.tensors.emplace_back("opt.momentum.x", randn({5, 7}, rng));
  const std::string ckpt = (g_artifacts / "c10" / "model.ckpt").string();
  save_checkpoint(m, ckpt, &st);
  TrainState back;
  auto loaded = load_checkpoint(ckpt, &back);
  bool ckpt_ok = back.epoch == 3 && back.tensors.size() == 1 && same_data(back.tensors[0].second, st.tensors[0].second);
  auto a = m.named_parameters(), b = loaded->named_parameters();
  auto ab = m.named_buffers(), bb = loaded->named_buffers();
  a.insert(a.end(), ab.begin(), ab.end());
  b.insert(b.end(), bb.begin(), bb.end());
  ckpt_ok &= a.size() == b.size();
  for (size_t i = 0; ckpt_ok && i < a.size(); ++i) ckpt_ok &= a[i].first == b[i].first && same_data(a[i].second, b[i].second);

  // Annotations: a VisDrone-style fixture and a written synthetic dataset.
  const std::string fixture =
      "684,8,273,116,0,0,0,0\n406,119,265,70,0,0,0,0\n1,67,10,14,1,1,0,1\n16,230,9,20,1,2,0,2\n"
      "100,100,33,33,1,9,1,0\n5,5,1,1,1,11,2,2\n";
  std::istringstream in(fixture);
  std::ostringstream out;
  write_annotations(out, parse_annotations(in).records);
  bool ann_ok = out.str() == fixture;
  SynthSpec spec;
  spec.num_images = 20;
  spec.seed = 10;
  const auto samples = synth_dataset(spec);
  write_dataset(samples, (g_artifacts / "c10" / "synth").string());
  const auto reread = load_dataset((g_artifacts / "c10" / "synth" / "manifest.txt").string(), 10);
  for (size_t i = 0; i < samples.size(); ++i) {
    ann_ok &= reread[i].targets.size() == samples[i].targets.size();
    for (size_t k = 0; ann_ok && k < samples[i].targets.size(); ++k) {
      ann_ok &= reread[i].targets[k].box == samples[i].targets[k].box && reread[i].targets[k].cls == samples[i].targets[k].cls;
    }
  }

  // Fixed-seed training: epoch-1 loss bit-for-bit.
  auto epoch1 = [] {
    RunConfig cfg = RunConfig::resolve({{"train.epochs", "2"}, {"train.eval_every", "0"},
                                        {"data.synth_train_images", "48"}, {"train.seed", "7"}});
    Trainer t(cfg, load_split(cfg.data, false, cfg.model.num_classes), {});
    t.run_epoch(0);
    return t.run_epoch(1).loss;
  };
  const double l1 = epoch1(), l2 = epoch1();
  const bool train_ok = l1 == l2 && std::isfinite(l1);
  const double s = seconds_since(t0);
  return {ckpt_ok && ann_ok && train_ok,
          fmt("checkpoint %s (%zu tensors); annotations %s; epoch-1 loss %.17g vs %.17g %s; %.0f s",
              ckpt_ok ? "exact" : "DIFFERS", a.size(), ann_ok ? "exact" : "DIFFER", l1, l2,
              train_ok ? "identical" : "DIFFER", s)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    } else if (a == "--artifacts" && i + 1 < argc) {
      g_artifacts = argv[++i];
    } else {
      std::cerr << "usage: fasterx_acceptance [--only N[,M...]] [--artifacts DIR]\n";
      return 2;
    }
  }
  fs::create_directories(g_artifacts);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"focus/pixel_shuffle inverse", c1_focus_roundtrip},
      {"gradient checks", c2_gradients},
      {"SimOTA vs exhaustive oracle", c3_simota_oracle},
      {"params/FLOPs accounting", c4_accounting},
      {"S-profile params ordering", c5_ablation_ordering},
      {"evaluator correctness", c6_evaluator},
      {"nano learnability (30 epochs, 500 synthetic images)", c7_learnability},
      {"4-head vs 3-head over 3 seeds", c8_four_heads},
      {"distillation protocol", c9_distillation},
      {"exact round trips", c10_roundtrips},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " - " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
