/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/neck.hpp"

#include <cmath>
#include <stdexcept>

#include "fasterx/ops.hpp"

namespace fasterx {

namespace {

void check_pyramid(const std::vector<Tensor>& pyr, size_t levels, const std::vector<int>& ch) {
  if (pyr.size() != levels) {
    throw std::invalid_argument("neck: expected " + std::to_string(levels) + " levels, got " +
                                std::to_string(pyr.size()));
  }
  for (size_t i = 0; i < pyr.size(); ++i) {
    if (pyr[i].rank() != 4 || pyr[i].dim(1) != ch[i]) {
      throw std::invalid_argument("neck: level " + std::to_string(i) + " has shape " +
                                  shape_str(pyr[i].shape()) + ", expected " +
                                  std::to_string(ch[i]) + " channels");
    }
    if (i > 0 && (pyr[i].dim(2) != 2 * pyr[i - 1].dim(2) ||
                  pyr[i].dim(3) != 2 * pyr[i - 1].dim(3))) {
      throw std::invalid_argument("neck: level " + std::to_string(i) +
                                  " is not twice the size of the coarser level");
    }
  }
}

int fuse_depth(double depth) { return static_cast<int>(std::lround(3 * depth)); }

}  // namespace

PAFPN::PAFPN(std::vector<int> channels, double depth, bool depthwise, Rng& rng)
    : channels_(std::move(channels)) {
  const int n = fuse_depth(depth);
  const size_t levels = channels_.size();
  for (size_t i = 1; i < levels; ++i) {
    const std::string k = std::to_string(i - 1);
    lateral_.push_back(register_module(
        "lateral." + k,
        std::make_shared<ConvBlock>(ConvSpec{.in = channels_[i - 1], .out = channels_[i]}, rng)));
    top_down_.push_back(register_module(
        "top_down." + k,
        std::make_shared<CSPLayer>(2 * channels_[i], channels_[i], n, false, depthwise, rng)));
  }
  for (size_t i = levels - 1; i >= 1; --i) {
    const std::string k = std::to_string(i - 1);
    down_.push_back(register_module(
        "down." + k,
        make_conv(ConvSpec{.in = channels_[i], .out = channels_[i], .kernel = 3, .stride = 2},
                  depthwise, rng)));
    bottom_up_.push_back(register_module(
        "bottom_up." + k,
        std::make_shared<CSPLayer>(2 * channels_[i], channels_[i - 1], n, false, depthwise, rng)));
  }
}

std::vector<Tensor> PAFPN::forward(const std::vector<Tensor>& pyr) {
  const size_t levels = channels_.size();
  check_pyramid(pyr, levels, channels_);
  std::vector<Tensor> lat(levels - 1);
  Tensor x = pyr[0];
  for (size_t i = 1; i < levels; ++i) {
    lat[i - 1] = lateral_[i - 1]->forward(x);
    x = top_down_[i - 1]->forward(
        ops::concat_channels({ops::upsample_nearest(lat[i - 1], 2), pyr[i]}));
  }
  std::vector<Tensor> out(levels);
  out[levels - 1] = x;
  for (size_t step = 0, i = levels - 1; i >= 1; --i, ++step) {
    x = bottom_up_[step]->forward(ops::concat_channels({down_[step]->forward(x), lat[i - 1]}));
    out[i - 1] = x;
  }
  return out;
}

SlimFPN::SlimFPN(std::vector<int> channels, int unified, double depth, bool depthwise, Rng& rng)
    : unified_(unified) {
  const int n = fuse_depth(depth);
  for (size_t i = 0; i < channels.size(); ++i) {
    reduce_.push_back(register_module("reduce." + std::to_string(i),
                                      std::make_shared<GhostModule>(channels[i], unified, 2, rng)));
  }
  for (size_t i = 1; i < channels.size(); ++i) {
    fuse_.push_back(register_module(
        "fuse." + std::to_string(i - 1),
        std::make_shared<CSPLayer>(2 * unified, unified, n, false, depthwise, rng)));
  }
}

std::vector<Tensor> SlimFPN::forward(const std::vector<Tensor>& pyr) {
  if (pyr.size() != reduce_.size()) {
    throw std::invalid_argument("slimfpn: expected " + std::to_string(reduce_.size()) +
                                " levels, got " + std::to_string(pyr.size()));
  }
  std::vector<int> ch;
  for (const auto& t : pyr) ch.push_back(t.rank() == 4 ? t.dim(1) : -1);
  check_pyramid(pyr, reduce_.size(), ch);
  std::vector<Tensor> out(pyr.size());
  out[0] = reduce_[0]->forward(pyr[0]);
  for (size_t i = 1; i < pyr.size(); ++i) {
    out[i] = fuse_[i - 1]->forward(ops::concat_channels(
        {ops::upsample_nearest(out[i - 1], 2), reduce_[i]->forward(pyr[i])}));
  }
  return out;
}

}  // namespace fasterx
