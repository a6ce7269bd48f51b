/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "fasterx/cost.hpp"
#include "fasterx/ops.hpp"

namespace fasterx {

// --- Module -----------------------------------------------------------------

void Module::collect(const std::string& prefix, bool buffers, NamedTensors& out) const {
  for (const auto& [name, t] : buffers ? buffers_ : params_) out.emplace_back(prefix + name, t);
  for (const auto& [name, child] : children_) child->collect(prefix + name + ".", buffers, out);
}

NamedTensors Module::named_parameters() const {
  NamedTensors out;
  collect("", false, out);
  return out;
}

NamedTensors Module::named_buffers() const {
  NamedTensors out;
  collect("", true, out);
  return out;
}

std::vector<Tensor> Module::parameters() const {
  std::vector<Tensor> out;
  for (auto& [_, t] : named_parameters()) out.push_back(t);
  return out;
}

int64_t Module::num_parameters() const {
  int64_t n = 0;
  for (const auto& [_, t] : named_parameters()) n += t.numel();
  return n;
}

void Module::train(bool on) {
  training_ = on;
  for (auto& [_, child] : children_) child->train(on);
}

void Module::set_path(const std::string& path) {
  path_ = path;
  for (auto& [name, child] : children_) child->set_path(path.empty() ? name : path + "." + name);
}

Tensor& Module::register_parameter(std::string name, Tensor t) {
  t.set_requires_grad(true);
  params_.emplace_back(std::move(name), std::move(t));
  return params_.back().second;
}

Tensor& Module::register_buffer(std::string name, Tensor t) {
  buffers_.emplace_back(std::move(name), std::move(t));
  return buffers_.back().second;
}

// --- blocks -----------------------------------------------------------------

namespace {

Tensor uniform(Shape shape, double bound, Rng& rng) {
  std::uniform_real_distribution<double> d(-bound, bound);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = d(rng);
  return t;
}

Tensor apply_act(const Tensor& x, Activation act) {
  return act == Activation::kSiLU ? ops::silu(x) : x;
}

}  // namespace

ConvBlock::ConvBlock(const ConvSpec& spec, Rng& rng) : spec_(spec) {
  if (spec_.padding < 0) spec_.padding = spec_.kernel / 2;
  if (spec_.in <= 0 || spec_.out <= 0 || spec_.kernel <= 0 || spec_.stride <= 0 ||
      spec_.groups <= 0 || spec_.in % spec_.groups || spec_.out % spec_.groups) {
    throw std::invalid_argument("ConvBlock: invalid spec in=" + std::to_string(spec_.in) +
                                " out=" + std::to_string(spec_.out) +
                                " groups=" + std::to_string(spec_.groups));
  }
  const int cin_g = spec_.in / spec_.groups;
  // Uniform(+-1/sqrt(fan_in)), the default initializer of common frameworks.
  const double bound = 1.0 / std::sqrt(static_cast<double>(cin_g * spec_.kernel * spec_.kernel));
  weight_ = register_parameter("weight",
                               uniform({spec_.out, cin_g, spec_.kernel, spec_.kernel}, bound, rng));
  if (spec_.bias) bias_ = register_parameter("bias", uniform({spec_.out}, bound, rng));
  if (spec_.norm) {
    gamma_ = register_parameter("bn.weight", Tensor({spec_.out}, 1.0));
    beta_ = register_parameter("bn.bias", Tensor({spec_.out}, 0.0));
    running_mean_ = register_buffer("bn.running_mean", Tensor({spec_.out}, 0.0));
    running_var_ = register_buffer("bn.running_var", Tensor({spec_.out}, 1.0));
  }
}

Tensor ConvBlock::forward(const Tensor& x) {
  CostScope scope(path());
  if (x.rank() != 4 || x.dim(1) != spec_.in) {
    throw std::invalid_argument("ConvBlock " + path() + ": expected " + std::to_string(spec_.in) +
                                " input channels, got " + shape_str(x.shape()));
  }
  Tensor y = ops::conv2d(x, weight_, bias_, spec_.stride, spec_.padding, spec_.groups);
  if (spec_.norm) {
    const bool fuse = spec_.act == Activation::kSiLU;
    y = ops::batch_norm(y, gamma_, beta_, running_mean_, running_var_, training(), kBnMomentum,
                        kBnEps, fuse);
    if (fuse) return y;
  }
  return apply_act(y, spec_.act);
}

DSConv::DSConv(const ConvSpec& spec, Rng& rng) {
  ConvSpec dw = spec;
  dw.out = spec.in;
  dw.groups = spec.in;
  ConvSpec pw = spec;
  pw.kernel = 1;
  pw.stride = 1;
  pw.padding = 0;
  pw.groups = 1;
  depthwise_ = register_module("dconv", std::make_shared<ConvBlock>(dw, rng));
  pointwise_ = register_module("pconv", std::make_shared<ConvBlock>(pw, rng));
}

Tensor DSConv::forward(const Tensor& x) { return pointwise_->forward(depthwise_->forward(x)); }

std::shared_ptr<Block> make_conv(const ConvSpec& spec, bool separable, Rng& rng) {
  if (separable) return std::make_shared<DSConv>(spec, rng);
  return std::make_shared<ConvBlock>(spec, rng);
}

GhostModule::GhostModule(int in, int out, int ratio, Rng& rng) {
  if (ratio < 2 || out % ratio) {
    throw std::invalid_argument("GhostModule: out=" + std::to_string(out) +
                                " not divisible by ratio=" + std::to_string(ratio));
  }
  const int intrinsic = out / ratio;
  primary_ = register_module("primary", std::make_shared<ConvBlock>(
                                            ConvSpec{.in = in, .out = intrinsic}, rng));
  cheap_ = register_module(
      "cheap", std::make_shared<ConvBlock>(ConvSpec{.in = intrinsic,
                                                    .out = out - intrinsic,
                                                    .kernel = 3,
                                                    .groups = intrinsic},
                                           rng));
}

Tensor GhostModule::forward(const Tensor& x) {
  Tensor y = primary_->forward(x);
  return ops::concat_channels({y, cheap_->forward(y)});
}

CBAM::CBAM(int channels, Rng& rng, int reduction, int spatial_kernel) {
  if (channels < reduction) {
    throw std::invalid_argument("CBAM: " + std::to_string(channels) +
                                " channels is below the reduction ratio " +
                                std::to_string(reduction));
  }
  const int mid = channels / reduction;
  fc1_ = register_module("fc1", std::make_shared<ConvBlock>(
                                    ConvSpec{.in = channels, .out = mid, .bias = true, .norm = false},
                                    rng));
  fc2_ = register_module("fc2", std::make_shared<ConvBlock>(ConvSpec{.in = mid,
                                                                     .out = channels,
                                                                     .bias = true,
                                                                     .norm = false,
                                                                     .act = Activation::kIdentity},
                                                            rng));
  spatial_ = register_module(
      "spatial", std::make_shared<ConvBlock>(ConvSpec{.in = 2,
                                                      .out = 1,
                                                      .kernel = spatial_kernel,
                                                      .act = Activation::kIdentity},
                                             rng));
}

Tensor CBAM::forward(const Tensor& x) {
  CostScope scope(path());
  Tensor avg = fc2_->forward(fc1_->forward(ops::global_avg_pool(x)));
  Tensor mx = fc2_->forward(fc1_->forward(ops::global_max_pool(x)));
  channel_gate_ = ops::sigmoid(ops::add(avg, mx));
  Tensor y = ops::mul(x, channel_gate_);
  Tensor pooled = ops::concat_channels({ops::channel_mean(y), ops::channel_max(y)});
  spatial_gate_ = ops::sigmoid(spatial_->forward(pooled));
  return ops::mul(y, spatial_gate_);
}

Bottleneck::Bottleneck(int in, int out, bool shortcut, bool separable, Rng& rng)
    : shortcut_(shortcut && in == out) {
  conv1_ = register_module("conv1", std::make_shared<ConvBlock>(ConvSpec{.in = in, .out = out}, rng));
  conv2_ = register_module("conv2",
                           make_conv(ConvSpec{.in = out, .out = out, .kernel = 3}, separable, rng));
}

Tensor Bottleneck::forward(const Tensor& x) {
  Tensor y = conv2_->forward(conv1_->forward(x));
  return shortcut_ ? ops::add(y, x) : y;
}

CSPLayer::CSPLayer(int in, int out, int n, bool shortcut, bool separable, Rng& rng) {
  const int hidden = out / 2;
  conv1_ = register_module("conv1", std::make_shared<ConvBlock>(ConvSpec{.in = in, .out = hidden}, rng));
  conv2_ = register_module("conv2", std::make_shared<ConvBlock>(ConvSpec{.in = in, .out = hidden}, rng));
  conv3_ = register_module("conv3",
                           std::make_shared<ConvBlock>(ConvSpec{.in = 2 * hidden, .out = out}, rng));
  for (int i = 0; i < n; ++i) {
    blocks_.push_back(register_module(
        "m." + std::to_string(i),
        std::make_shared<Bottleneck>(hidden, hidden, shortcut, separable, rng)));
  }
}

Tensor CSPLayer::forward(const Tensor& x) {
  Tensor a = conv1_->forward(x);
  for (auto& b : blocks_) a = b->forward(a);
  return conv3_->forward(ops::concat_channels({a, conv2_->forward(x)}));
}

SPP::SPP(int in, int out, Rng& rng) {
  const int hidden = in / 2;
  conv1_ = register_module("conv1", std::make_shared<ConvBlock>(ConvSpec{.in = in, .out = hidden}, rng));
  conv2_ = register_module("conv2",
                           std::make_shared<ConvBlock>(ConvSpec{.in = 4 * hidden, .out = out}, rng));
}

Tensor SPP::forward(const Tensor& x) {
  CostScope scope(path());
  Tensor y = conv1_->forward(x);
  std::vector<Tensor> parts{y};
  for (int k : {5, 9, 13}) parts.push_back(ops::max_pool2d(y, k));
  return conv2_->forward(ops::concat_channels(parts));
}

FocusStem::FocusStem(int in, int out, Rng& rng) {
  conv_ = register_module("conv", std::make_shared<ConvBlock>(
                                      ConvSpec{.in = 4 * in, .out = out, .kernel = 3}, rng));
}

Tensor FocusStem::forward(const Tensor& x) { return conv_->forward(ops::focus(x, 2)); }

}  // namespace fasterx
