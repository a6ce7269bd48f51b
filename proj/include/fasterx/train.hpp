/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fasterx/data.hpp"
#include "fasterx/distill.hpp"
#include "fasterx/eval.hpp"
#include "fasterx/model.hpp"

namespace fasterx {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 8;
  double lr = 0.02;  // peak learning rate
  double momentum = 0.9;
  bool nesterov = true;
  double weight_decay = 5e-4;  // conv weights only
  int warmup_epochs = 1;       // learning-rate warmup (not distillation warmup)
  double min_lr_ratio = 0.05;
  double mosaic_prob = 0.5;
  double mosaic_scale_min = 0.75;
  double mosaic_scale_max = 1.25;
  int eval_every = 10;  // also evaluates after the last epoch; 0 = only then
  uint64_t seed = 0;
  bool fast_matmul = true;  // float32 GEMM during training
};

struct DataConfig {
  // A manifest path, or "synth" for generated data.
  std::string train = "synth";
  std::string val = "synth";
  int synth_train_images = 500;
  int synth_val_images = 100;
  int synth_image_size = 128;
  uint64_t synth_seed = 0;
  uint64_t synth_val_seed = 1000;
};

struct EvalConfig {
  double score_thr = 0.01;
  double nms_thr = 0.65;
  int batch_size = 16;
};

// Layered run configuration: defaults < key=value file < command line.
// Keys are dotted: model.*, distill.*, train.*, assign.*, loss.*, data.*,
// eval.*, run.dir. model.preset is applied before every other model key.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  AssignConfig assign;
  LossConfig loss;
  DataConfig data;
  EvalConfig eval;
  std::string run_dir;

  // Desk-scale defaults: fasterx-nano at 128 px on synthetic data.
  static RunConfig defaults();
  static std::vector<std::pair<std::string, std::string>> default_pairs();
  // Applies pairs in order on top of default_pairs(); later keys win.
  static RunConfig resolve(const std::vector<std::pair<std::string, std::string>>& overrides);

  // Every resolved key, sorted.
  std::string to_text() const;
  void validate() const;
};

// key=value lines; '#' comments and blank lines are skipped.
std::vector<std::pair<std::string, std::string>> read_config_pairs(const std::string& path);
std::vector<std::pair<std::string, std::string>> parse_config_pairs(const std::string& text,
                                                                    const std::string& source);

// --- optimisation ---------------------------------------------------------------

// Quadratic warmup to lr over the first warmup_iters, then cosine decay to
// lr * min_lr_ratio at total_iters.
double learning_rate(const TrainConfig& cfg, int64_t iter, int64_t iters_per_epoch);

// SGD with momentum (optionally Nesterov). Weight decay applies to rank-4
// parameters (conv kernels).
class Sgd {
 public:
  Sgd(NamedTensors params, double momentum, bool nesterov, double weight_decay);
  void step(double lr);
  void zero_grad();
  NamedTensors state() const;  // momentum buffers as "opt.momentum.<param>"
  void load_state(const NamedTensors& state);

 private:
  NamedTensors params_;
  std::vector<std::vector<double>> velocity_;
  double momentum_, weight_decay_;
  bool nesterov_;
};

// --- training loop ------------------------------------------------------------------

struct EpochLog {
  int epoch = 0;
  TrainPhase phase = TrainPhase::kPlain;
  double lr = 0;
  int steps = 0;
  // Means over the epoch's steps.
  double loss = 0, cls = 0, reg = 0, obj = 0, num_fg = 0;
  std::optional<double> aux_loss, aux_cls, aux_reg, aux_obj, align;
  uint64_t assign_calls = 0;
  double seconds = 0;
  std::optional<EvalResult> eval;
};

// One JSON object per line; aux fields only when distillation is on.
std::string to_json_line(const EpochLog& log);

// Builds the train or validation split named by the data config.
std::vector<Sample> load_split(const DataConfig& cfg, bool validation, int num_classes);

// Boxes in image pixels for every sample, in dataset order.
ImageTargets targets_of(const std::vector<Sample>& samples);

// Letterboxes each image to the model input, predicts, maps boxes back.
ImageDetections predict_samples(Detector& model, const std::vector<Sample>& samples,
                                const EvalConfig& cfg);

class Trainer {
 public:
  Trainer(RunConfig cfg, std::vector<Sample> train, std::vector<Sample> val);

  // Runs one epoch of optimisation; evaluates when the cadence says so.
  EpochLog run_epoch(int epoch);
  // Runs all epochs. When run_dir is set, writes config.txt, appends
  // log.jsonl and keeps last.ckpt / best.ckpt (best by AP50).
  std::vector<EpochLog> fit(std::ostream* progress = nullptr);
  EvalResult evaluate_val();

  Detector& model() { return model_; }
  const RunConfig& config() const { return cfg_; }
  // Assembled input batch of `step` in `epoch` (exposed for tests).
  std::pair<Tensor, ImageTargets> batch(int epoch, int step) const;
  int steps_per_epoch() const;

 private:
  Sample augmented(int epoch, int index) const;
  std::vector<int> order(int epoch) const;

  RunConfig cfg_;
  std::vector<Sample> train_, val_;
  Detector model_;
  Sgd opt_;
  int64_t iter_ = 0;
};

// Best-effort allocator tuning for training workloads with large, short-lived
// buffers.
void tune_allocator();

}  // namespace fasterx
