/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <vector>

#include "fasterx/nn.hpp"

namespace fasterx {

// Levels are ordered coarse-first (P1 at stride 32 first); adjacent levels
// differ by exactly 2x in spatial size.
class Neck : public Module {
 public:
  virtual std::vector<Tensor> forward(const std::vector<Tensor>& pyramid) = 0;
  virtual std::vector<int> out_channels() const = 0;
};

// Top-down FPN plus the bottom-up aggregation path; per-level channels are
// preserved.
class PAFPN : public Neck {
 public:
  PAFPN(std::vector<int> channels, double depth, bool depthwise, Rng& rng);
  std::vector<Tensor> forward(const std::vector<Tensor>& pyramid) override;
  std::vector<int> out_channels() const override { return channels_; }

 private:
  std::vector<int> channels_;
  std::vector<std::shared_ptr<ConvBlock>> lateral_;
  std::vector<std::shared_ptr<CSPLayer>> top_down_;
  std::vector<std::shared_ptr<Block>> down_;
  std::vector<std::shared_ptr<CSPLayer>> bottom_up_;
};

// Every level is mapped to `unified` channels by a Ghost module, then fused
// top-down only.
class SlimFPN : public Neck {
 public:
  SlimFPN(std::vector<int> channels, int unified, double depth, bool depthwise, Rng& rng);
  std::vector<Tensor> forward(const std::vector<Tensor>& pyramid) override;
  std::vector<int> out_channels() const override {
    return std::vector<int>(reduce_.size(), unified_);
  }

 private:
  int unified_;
  std::vector<std::shared_ptr<GhostModule>> reduce_;
  std::vector<std::shared_ptr<CSPLayer>> fuse_;
};

}  // namespace fasterx
