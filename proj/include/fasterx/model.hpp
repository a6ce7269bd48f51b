/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fasterx/backbone.hpp"
#include "fasterx/heads.hpp"
#include "fasterx/neck.hpp"

namespace fasterx {

enum class Profile { kS, kTiny, kNano };
enum class NeckMode { kPAFPN, kSlimFPN };

std::string to_string(Profile p);
std::string to_string(NeckMode m);
Profile parse_profile(const std::string& s);
NeckMode parse_neck_mode(const std::string& s);

struct DistillConfig {
  bool enabled = false;
  int warmup_epochs = 50;
  double lambda = 1.0;
  // Aux head hidden width = 256 * aux_width (1.25 is the X-sized head).
  double aux_width = 1.25;
};

// Profile multipliers:
//
//   profile  depth  width  backbone/neck convs  head hidden
//   S        0.33   0.50   standard             128
//   Tiny     0.33   0.375  standard             96
//   Nano     0.33   0.25   depthwise separable  64
//
// Backbone channels for width w: stem 64w, then 128w, 256w, 512w, 1024w at
// strides 4, 8, 16, 32. CSP repeats per stage: 1, 3, 3, 1 (x round(3*depth)).
struct ModelConfig {
  Profile profile = Profile::kS;
  int input_size = 640;
  NeckMode neck = NeckMode::kSlimFPN;
  HeadMode head = HeadMode::kDSPixSF;
  int heads = 4;
  bool attention = true;
  int num_classes = 10;
  int unified_channels = 0;  // SlimFPN width; 0 selects the P3 channel count
  int pixsf_r = 2;
  DistillConfig distill;

  double depth() const;
  double width() const;
  bool depthwise() const { return profile == Profile::kNano; }
  int head_hidden() const;
  // Strides of the configured levels, coarse-first.
  std::vector<int> strides() const;

  // Throws std::invalid_argument on inconsistent settings.
  void validate() const;

  // Canonical "key=value" lines, sorted by key.
  std::string to_text() const;
  static ModelConfig from_text(const std::string& text);
  // Sets one field from its canonical key ("head", "distill.lambda", ...).
  void set(const std::string& key, const std::string& value);
  // FNV-1a 64 over the canonical text of the inference architecture (all
  // fields except distill.*).
  uint64_t digest() const;

  // yolox-{s,tiny,nano}[-p4], fasterx-{s,tiny,nano}.
  static ModelConfig preset(const std::string& name);
  static std::vector<std::string> preset_names();
};

struct DetectorOutput {
  std::vector<HeadOutput> student;
  std::vector<HeadOutput> aux;
  // Student features projected to the aux feature shape, one per level.
  std::vector<Tensor> aligned;
};

class Detector : public Module {
 public:
  explicit Detector(ModelConfig cfg, uint64_t seed = 0);

  // Student heads only (the inference graph).
  std::vector<HeadOutput> forward(const Tensor& images);
  // Student plus, with distillation enabled, aux heads and aligned features.
  DetectorOutput forward_train(const Tensor& images);

  const ModelConfig& config() const { return cfg_; }
  bool has_aux() const { return !aux_heads_.empty(); }
  // True for parameter/buffer paths that exist only for training.
  static bool is_training_only(const std::string& path);

 private:
  std::vector<Tensor> features(const Tensor& images);

  ModelConfig cfg_;
  std::shared_ptr<CSPDarknet> backbone_;
  std::shared_ptr<Neck> neck_;
  std::vector<std::shared_ptr<DetectHead>> heads_;
  std::vector<std::shared_ptr<DetectHead>> aux_heads_;
  std::vector<std::shared_ptr<ConvBlock>> align_;
};

// Inference copy without aux heads or alignment projections; parameters and
// buffers are copied by name.
std::unique_ptr<Detector> strip_aux(const Detector& model);

// Copies values of all same-named tensors; throws if `dst` has a tensor that
// `src` lacks or shapes differ.
void copy_state(const Module& src, Module& dst);

struct Detection {
  Box box;
  int cls = 0;
  double score = 0;
};

// Class-wise greedy NMS; returns kept indices in descending score order.
std::vector<int> nms(const std::vector<Detection>& dets, double iou_threshold);

// Decodes every level of image `index`, keeps locations whose best
// obj * cls score is >= score_thr, then applies NMS.
std::vector<Detection> postprocess(const std::vector<HeadOutput>& outputs, int index,
                                   double score_thr, double nms_thr, int max_dets = 300);

// Runs the model in eval mode without gradients.
std::vector<std::vector<Detection>> predict(Detector& model, const Tensor& images,
                                            double score_thr, double nms_thr);

// --- checkpoints -------------------------------------------------------------

struct TrainState {
  int epoch = -1;
  NamedTensors tensors;  // optimizer state etc.
};

// Text header (version, config digest, config, tensor table) followed by
// little-endian float64 payloads in table order and a payload checksum.
void save_checkpoint(const Detector& model, const std::string& path,
                     const TrainState* state = nullptr);
// Builds a model from the stored config and loads it.
std::unique_ptr<Detector> load_checkpoint(const std::string& path, TrainState* state = nullptr);
// Loads into an existing model. The architecture digest must match;
// training-only tensors absent from `model` are skipped.
void load_checkpoint_into(Detector& model, const std::string& path, TrainState* state = nullptr);

}  // namespace fasterx
