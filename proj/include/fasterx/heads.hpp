/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <string>
#include <vector>

#include "fasterx/geometry.hpp"
#include "fasterx/nn.hpp"

namespace fasterx {

enum class HeadMode { kPlain, kDS, kPixSF, kDSPixSF };

std::string to_string(HeadMode m);
HeadMode parse_head_mode(const std::string& s);
inline bool is_pixsf(HeadMode m) { return m == HeadMode::kPixSF || m == HeadMode::kDSPixSF; }
inline bool is_separable(HeadMode m) { return m == HeadMode::kDS || m == HeadMode::kDSPixSF; }

struct HeadConfig {
  HeadMode mode = HeadMode::kDSPixSF;
  bool attention = false;
  int hidden = 128;
  int r = 2;
  int num_classes = 10;
};

// Raw per-level predictions (NCHW logits / offsets).
struct HeadOutput {
  Tensor cls;  // [N, num_classes, H, W]
  Tensor reg;  // [N, 4, H, W]
  Tensor obj;  // [N, 1, H, W]
  GridSpec grid;
  // Last feature shared by both streams, used for distillation alignment.
  Tensor feature;
};

// Classification and objectness predictor bias: sigmoid(bias) = 0.01.
double prior_bias();

class DetectHead : public Module {
 public:
  virtual HeadOutput forward(const Tensor& f, int stride) = 0;
  int feature_channels() const { return hidden_; }
  // Spatial reduction of `feature` relative to the level's grid.
  virtual int feature_stride() const = 0;

 protected:
  // Two conv streams (cls; reg + obj) over `hidden_` channels, then 1x1
  // predictors with out_mult times the usual output channels.
  void build_streams(const HeadConfig& cfg, int out_mult, Rng& rng);
  void run_streams(const Tensor& x, HeadOutput& out);

  int hidden_ = 0;
  std::shared_ptr<CBAM> cbam_;
  std::vector<std::shared_ptr<Block>> cls_convs_, reg_convs_;
  std::shared_ptr<ConvBlock> cls_pred_, reg_pred_, obj_pred_;
};

// Decoupled head: 1x1 stem, two conv streams, 1x1 predictors.
class PlainHead : public DetectHead {
 public:
  PlainHead(int in, const HeadConfig& cfg, Rng& rng);
  HeadOutput forward(const Tensor& f, int stride) override;
  int feature_stride() const override { return 1; }

 private:
  std::shared_ptr<ConvBlock> stem_;
};

// Position encode-decode head: focus(F, r) -> 1x1 encoder -> optional CBAM ->
// two streams at H/r x W/r -> 1x1 predictors to r*r*C -> pixel_shuffle.
class PixSFHead : public DetectHead {
 public:
  PixSFHead(int in, const HeadConfig& cfg, Rng& rng);
  HeadOutput forward(const Tensor& f, int stride) override;
  int feature_stride() const override { return r_; }

 private:
  int r_;
  std::shared_ptr<ConvBlock> encoder_;
};

std::shared_ptr<DetectHead> make_head(int in, const HeadConfig& cfg, Rng& rng);

}  // namespace fasterx
