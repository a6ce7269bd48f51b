/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/backbone.hpp"

#include <algorithm>
#include <cmath>

namespace fasterx {

CSPDarknet::CSPDarknet(double depth, double width, bool depthwise, Rng& rng) {
  const int base = static_cast<int>(width * 64);
  const int base_depth = std::max(static_cast<int>(std::lround(depth * 3)), 1);
  stem_ = register_module("stem", std::make_shared<FocusStem>(3, base, rng));
  // dark2..dark5; the last stage carries SPP and drops the bottleneck shortcut.
  const int repeats[4] = {base_depth, 3 * base_depth, 3 * base_depth, base_depth};
  int c = base;
  for (int s = 0; s < 4; ++s) {
    const std::string name = "dark" + std::to_string(s + 2);
    downs_.push_back(register_module(
        name + ".down", make_conv(ConvSpec{.in = c, .out = 2 * c, .kernel = 3, .stride = 2},
                                  depthwise, rng)));
    c *= 2;
    if (s == 3) spp_ = register_module(name + ".spp", std::make_shared<SPP>(c, c, rng));
    stages_.push_back(register_module(
        name + ".csp", std::make_shared<CSPLayer>(c, c, repeats[s], s != 3, depthwise, rng)));
    channels_.insert(channels_.begin(), c);
  }
}

std::vector<Tensor> CSPDarknet::forward(const Tensor& images) {
  Tensor x = stem_->forward(images);
  std::vector<Tensor> pyramid;
  for (int s = 0; s < 4; ++s) {
    x = downs_[s]->forward(x);
    if (s == 3) x = spp_->forward(x);
    x = stages_[s]->forward(x);
    pyramid.insert(pyramid.begin(), x);
  }
  return pyramid;
}

}  // namespace fasterx
