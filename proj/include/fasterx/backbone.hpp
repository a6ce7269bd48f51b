/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <vector>

#include "fasterx/nn.hpp"

namespace fasterx {

// CSPDarknet scaled by depth/width multipliers. forward() returns the pyramid
// coarse-first: P1 (stride 32), P2 (16), P3 (8), P4 (4).
class CSPDarknet : public Module {
 public:
  CSPDarknet(double depth, double width, bool depthwise, Rng& rng);
  std::vector<Tensor> forward(const Tensor& images);
  // Channels of P1..P4.
  const std::vector<int>& channels() const { return channels_; }

 private:
  std::shared_ptr<FocusStem> stem_;
  std::vector<std::shared_ptr<Block>> downs_;
  std::vector<std::shared_ptr<Block>> stages_;
  std::shared_ptr<SPP> spp_;
  std::vector<int> channels_;
};

}  // namespace fasterx
