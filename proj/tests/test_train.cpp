/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fasterx/plot.hpp"
#include "fasterx/train.hpp"
#include "json.hpp"

using namespace fasterx;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_run(std::vector<std::pair<std::string, std::string>> extra = {}) {
  std::vector<std::pair<std::string, std::string>> kv = {
      {"model.input_size", "64"},     {"train.batch_size", "4"},   {"train.epochs", "2"},
      {"train.eval_every", "1"},      {"data.synth_image_size", "64"}, {"train.mosaic_prob", "0.5"}};
  kv.insert(kv.end(), extra.begin(), extra.end());
  return RunConfig::resolve(kv);
}

std::vector<Sample> tiny_data(int n, uint64_t seed) {
  SynthSpec spec;
  spec.image_size = 64;
  spec.num_images = n;
  spec.seed = seed;
  return synth_dataset(spec);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fasterx_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(RunConfig, DefaultsAreDeskScale) {
  const RunConfig c = RunConfig::defaults();
  EXPECT_EQ(c.model.profile, Profile::kNano);
  EXPECT_EQ(c.model.input_size, 128);
  EXPECT_EQ(c.train.momentum, 0.9);
  EXPECT_TRUE(c.train.nesterov);
  EXPECT_EQ(c.train.eval_every, 10);
  EXPECT_EQ(c.data.train, "synth");
}

TEST(RunConfig, LayersApplyInOrderWithPresetFirst) {
  // File layer, then command-line layer; the preset is applied before the
  // explicit model keys whatever their order.
  auto pairs = parse_config_pairs("# file\nmodel.heads = 3\ntrain.epochs=7\ndistill.enabled=true\n", "f");
  pairs.push_back({"train.epochs", "9"});
  pairs.push_back({"model.preset", "fasterx-tiny"});
  const RunConfig c = RunConfig::resolve(pairs);
  EXPECT_EQ(c.model.profile, Profile::kTiny);
  EXPECT_EQ(c.model.heads, 3);
  EXPECT_EQ(c.train.epochs, 9);
  EXPECT_TRUE(c.model.distill.enabled);
  EXPECT_THROW(RunConfig::resolve({{"train.bogus", "1"}}), std::invalid_argument);
  EXPECT_THROW(RunConfig::resolve({{"train.epochs", "x"}}), std::invalid_argument);
  EXPECT_THROW(RunConfig::resolve({{"train.mosaic_prob", "2"}}), std::invalid_argument);
  EXPECT_THROW(parse_config_pairs("no equals sign\n", "f"), std::invalid_argument);
}

TEST(RunConfig, TextRoundTrip) {
  const RunConfig c = tiny_run({{"distill.enabled", "true"}, {"distill.lambda", "0.3"}, {"assign.cost", "legacy"}});
  const RunConfig back = RunConfig::resolve(parse_config_pairs(c.to_text(), "text"));
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(back.assign.cost, CostMode::kLegacy);
}

TEST(Schedule, WarmupThenCosine) {
  TrainConfig t;
  t.epochs = 10;
  t.warmup_epochs = 2;
  t.lr = 0.1;
  t.min_lr_ratio = 0.05;
  const int per = 5;
  EXPECT_NEAR(learning_rate(t, 0, per), 0.1 * 0.01, 1e-15);
  EXPECT_NEAR(learning_rate(t, 9, per), 0.1, 1e-15);
  EXPECT_NEAR(learning_rate(t, 10, per), 0.1, 1e-15);
  EXPECT_NEAR(learning_rate(t, 50, per), 0.005, 1e-15);
  double prev = 1;
  for (int i = 10; i <= 50; ++i) {
    const double lr = learning_rate(t, i, per);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

TEST(Sgd, NesterovStepWithConvWeightDecay) {
  Tensor w = Tensor::from_vector({1, 1, 1, 2}, {1.0, -2.0}, true);
  Tensor b = Tensor::from_vector({2}, {0.5, 0.5}, true);
  Sgd opt({{"w", w}, {"b", b}}, 0.9, true, 0.1);
  for (int step = 0; step < 2; ++step) {
    w.mutable_grad()[0] = 1.0;
    w.mutable_grad()[1] = 0.0;
    b.mutable_grad()[0] = 2.0;
    b.mutable_grad()[1] = 0.0;
    opt.step(0.5);
  }
  // Step 1: g = 1 + 0.1*1 = 1.1, v = 1.1, w = 1 - 0.5*(1.1 + 0.99) = -0.045
  // Step 2: g = 1 + 0.1*(-0.045) = 0.9955, v = 0.99 + 0.9955 = 1.9855,
  //         w = -0.045 - 0.5*(0.9955 + 1.78695)
  EXPECT_NEAR(w.data()[0], -0.045 - 0.5 * (0.9955 + 0.9 * 1.9855), 1e-15);
  // Biases skip weight decay: g = 2, v = 2 then 3.8.
  EXPECT_NEAR(b.data()[0], 0.5 - 0.5 * (2 + 1.8) - 0.5 * (2 + 0.9 * 3.8), 1e-15);
  EXPECT_NEAR(b.data()[1], 0.5, 0.0);
  const auto st = opt.state();
  ASSERT_EQ(st.size(), 2u);
  EXPECT_EQ(st[0].first, "opt.momentum.w");
  Sgd other({{"w", w}, {"b", b}}, 0.9, true, 0.1);
  other.load_state(st);
  EXPECT_EQ(other.state()[1].second.data()[0], st[1].second.data()[0]);
}

TEST(Trainer, BatchesAreDeterministicAndValid) {
  const RunConfig cfg = tiny_run({{"train.mosaic_prob", "1.0"}});
  Trainer a(cfg, tiny_data(12, 1), {});
  Trainer b(cfg, tiny_data(12, 1), {});
  EXPECT_EQ(a.steps_per_epoch(), 3);
  for (int e = 0; e < 2; ++e) {
    const auto [xa, ta] = a.batch(e, 1);
    const auto [xb, tb] = b.batch(e, 1);
    EXPECT_EQ(xa.shape(), (Shape{4, 3, 64, 64}));
    EXPECT_TRUE(std::equal(xa.data().begin(), xa.data().end(), xb.data().begin()));
    ASSERT_EQ(ta.size(), tb.size());
    for (size_t i = 0; i < ta.size(); ++i) {
      ASSERT_EQ(ta[i].size(), tb[i].size());
      for (const auto& g : ta[i]) {
        EXPECT_GE(g.box.width(), 2.0);
        EXPECT_GE(g.box.x1, 0.0);
        EXPECT_LE(g.box.x2, 64.0);
        EXPECT_GE(g.cls, 0);
        EXPECT_LT(g.cls, 10);
      }
    }
  }
  // Different epochs draw different batches.
  const auto [x0, t0] = a.batch(0, 0);
  const auto [x1, t1] = a.batch(1, 0);
  EXPECT_FALSE(std::equal(x0.data().begin(), x0.data().end(), x1.data().begin()));
}

TEST(Trainer, FixedSeedReproducesLossBitForBit) {
  const RunConfig cfg = tiny_run({{"train.eval_every", "0"}});
  Trainer a(cfg, tiny_data(8, 2), {});
  Trainer b(cfg, tiny_data(8, 2), {});
  EXPECT_EQ(a.run_epoch(0).loss, b.run_epoch(0).loss);
  const double la = a.run_epoch(1).loss;
  EXPECT_EQ(la, b.run_epoch(1).loss);
  EXPECT_TRUE(std::isfinite(la));
}

TEST(Trainer, FitWritesRunArtifacts) {
  const fs::path dir = fresh_dir("fit_plain");
  RunConfig cfg = tiny_run();
  cfg.run_dir = dir.string();
  Trainer t(cfg, tiny_data(8, 3), tiny_data(4, 4));
  const auto logs = t.fit();
  ASSERT_EQ(logs.size(), 2u);
  EXPECT_TRUE(logs[1].eval.has_value());
  EXPECT_TRUE(fs::exists(dir / "config.txt"));
  EXPECT_TRUE(fs::exists(dir / "best.ckpt"));
  TrainState st;
  auto loaded = load_checkpoint((dir / "last.ckpt").string(), &st);
  EXPECT_EQ(st.epoch, 1);
  EXPECT_EQ(loaded->config().digest(), cfg.model.digest());

  std::ifstream log(dir / "log.jsonl");
  std::string line;
  int n = 0;
  while (std::getline(log, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["epoch"], n);
    EXPECT_FALSE(j.contains("aux_loss"));
    EXPECT_FALSE(j.contains("align"));
    EXPECT_EQ(j["phase"], "plain");
    ++n;
  }
  EXPECT_EQ(n, 2);
  const Series s = read_series((dir / "log.jsonl").string(), "AP50", "run");
  EXPECT_EQ(s.points.size(), 2u);
  // The written config resolves back to the same run.
  const RunConfig back = RunConfig::resolve(read_config_pairs((dir / "config.txt").string()));
  EXPECT_EQ(back.to_text(), cfg.to_text());
  fs::remove_all(dir);
}

TEST(Trainer, DistilledRunLogsPhasesAndAuxFields) {
  const fs::path dir = fresh_dir("fit_distill");
  RunConfig cfg = tiny_run({{"distill.enabled", "true"}, {"distill.warmup_epochs", "1"}, {"train.eval_every", "0"}});
  cfg.run_dir = dir.string();
  Trainer t(cfg, tiny_data(8, 5), {});
  const auto logs = t.fit();
  ASSERT_EQ(logs.size(), 2u);
  EXPECT_EQ(logs[0].phase, TrainPhase::kJoint);
  EXPECT_EQ(logs[1].phase, TrainPhase::kGuided);
  EXPECT_EQ(logs[0].assign_calls, 2u * 8);
  EXPECT_EQ(logs[1].assign_calls, 8u);
  const auto j = nlohmann::json::parse(to_json_line(logs[1]));
  EXPECT_TRUE(j.contains("aux_loss"));
  EXPECT_TRUE(j.contains("align"));
  // The stripped checkpoint model carries no aux tensors.
  auto loaded = load_checkpoint((dir / "last.ckpt").string());
  EXPECT_LT(strip_aux(*loaded)->num_parameters(), loaded->num_parameters());
  fs::remove_all(dir);
}

TEST(Plot, OneCurvePerRun) {
  const fs::path dir = fresh_dir("plot");
  fs::create_directories(dir);
  for (const char* name : {"a.jsonl", "b.jsonl"}) {
    std::ofstream f(dir / name);
    f << R"({"epoch":0,"loss":3.0})" << "\n"
      << R"({"epoch":1,"loss":2.0,"AP50":0.2})" << "\n"
      << R"({"epoch":2,"loss":1.5,"AP50":0.4,"AP_M":null})" << "\n";
  }
  const std::vector<Series> s = {read_series((dir / "a.jsonl").string(), "AP50", "a"),
                                 read_series((dir / "b.jsonl").string(), "AP50", "b")};
  EXPECT_EQ(s[0].points.size(), 2u);
  EXPECT_EQ(render_plot(s, "AP50", "AP50", (dir / "ap50.png").string()), 2);
  EXPECT_TRUE(fs::exists(dir / "ap50.png"));
  EXPECT_EQ(read_series((dir / "a.jsonl").string(), "AP_M", "a").points.size(), 0u);
  fs::remove_all(dir);
}
