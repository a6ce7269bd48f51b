/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fasterx/tensor.hpp"

namespace fasterx {

using Rng = std::mt19937_64;
using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.03;

// Base for everything that owns parameters. Children are registered by name
// so parameters get stable dotted paths ("neck.fuse.0.conv1.bn.weight").
class Module {
 public:
  virtual ~Module() = default;

  NamedTensors named_parameters() const;
  // Non-trainable state (batch-norm running statistics).
  NamedTensors named_buffers() const;
  std::vector<Tensor> parameters() const;
  int64_t num_parameters() const;

  void train(bool on = true);
  bool training() const { return training_; }

  // Assigns dotted paths to this module and all descendants. Forward passes
  // report their cost under these paths.
  void set_path(const std::string& path);
  const std::string& path() const { return path_; }

 protected:
  Tensor& register_parameter(std::string name, Tensor t);
  Tensor& register_buffer(std::string name, Tensor t);
  template <class M>
  std::shared_ptr<M> register_module(std::string name, std::shared_ptr<M> m) {
    children_.emplace_back(std::move(name), m);
    return m;
  }

 private:
  void collect(const std::string& prefix, bool buffers, NamedTensors& out) const;

  NamedTensors params_;
  NamedTensors buffers_;
  std::vector<std::pair<std::string, std::shared_ptr<Module>>> children_;
  bool training_ = true;
  std::string path_;
};

// A module with a single tensor in and out.
class Block : public Module {
 public:
  virtual Tensor forward(const Tensor& x) = 0;
};

enum class Activation { kIdentity, kSiLU };

struct ConvSpec {
  int in = 0;
  int out = 0;
  int kernel = 1;
  int stride = 1;
  int padding = -1;  // -1: kernel / 2 ("same" at stride 1)
  int groups = 1;
  bool bias = false;
  bool norm = true;
  Activation act = Activation::kSiLU;
};

// conv -> optional batch norm -> activation.
class ConvBlock : public Block {
 public:
  ConvBlock(const ConvSpec& spec, Rng& rng);
  Tensor forward(const Tensor& x) override;

  const ConvSpec& spec() const { return spec_; }
  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }

 private:
  ConvSpec spec_;
  Tensor weight_, bias_;
  Tensor gamma_, beta_, running_mean_, running_var_;
};

// Depthwise k x k (groups = in) followed by pointwise 1x1. Norm and
// activation settings from the spec apply to both stages.
class DSConv : public Block {
 public:
  DSConv(const ConvSpec& spec, Rng& rng);
  Tensor forward(const Tensor& x) override;

 private:
  std::shared_ptr<ConvBlock> depthwise_, pointwise_;
};

// Standard conv block or depthwise separable, chosen by `separable`.
std::shared_ptr<Block> make_conv(const ConvSpec& spec, bool separable, Rng& rng);

// Primary 1x1 conv to out/ratio intrinsic maps, cheap depthwise 3x3 producing
// the remaining ghost maps, concatenated.
class GhostModule : public Block {
 public:
  GhostModule(int in, int out, int ratio, Rng& rng);
  Tensor forward(const Tensor& x) override;

 private:
  std::shared_ptr<ConvBlock> primary_, cheap_;
};

// Channel attention (shared MLP over avg/max pooled vectors) followed by
// spatial attention (7x7 conv over per-pixel channel mean/max).
class CBAM : public Block {
 public:
  CBAM(int channels, Rng& rng, int reduction = 16, int spatial_kernel = 7);
  Tensor forward(const Tensor& x) override;

  // Gate values from the most recent forward, for inspection.
  const Tensor& last_channel_gate() const { return channel_gate_; }
  const Tensor& last_spatial_gate() const { return spatial_gate_; }

 private:
  std::shared_ptr<ConvBlock> fc1_, fc2_, spatial_;
  Tensor channel_gate_, spatial_gate_;
};

class Bottleneck : public Block {
 public:
  Bottleneck(int in, int out, bool shortcut, bool separable, Rng& rng);
  Tensor forward(const Tensor& x) override;

 private:
  std::shared_ptr<ConvBlock> conv1_;
  std::shared_ptr<Block> conv2_;
  bool shortcut_;
};

// Cross-stage partial block: two 1x1 branches, n bottlenecks on one of them,
// concatenation and a 1x1 merge.
class CSPLayer : public Block {
 public:
  CSPLayer(int in, int out, int n, bool shortcut, bool separable, Rng& rng);
  Tensor forward(const Tensor& x) override;

 private:
  std::shared_ptr<ConvBlock> conv1_, conv2_, conv3_;
  std::vector<std::shared_ptr<Bottleneck>> blocks_;
};

// Spatial pyramid pooling with stride-1 max pools (5, 9, 13).
class SPP : public Block {
 public:
  SPP(int in, int out, Rng& rng);
  Tensor forward(const Tensor& x) override;

 private:
  std::shared_ptr<ConvBlock> conv1_, conv2_;
};

// Space-to-depth (r = 2) followed by a 3x3 conv block.
class FocusStem : public Block {
 public:
  FocusStem(int in, int out, Rng& rng);
  Tensor forward(const Tensor& x) override;

 private:
  std::shared_ptr<ConvBlock> conv_;
};

}  // namespace fasterx
