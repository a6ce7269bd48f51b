/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/heads.hpp"

#include <cmath>
#include <stdexcept>

#include "fasterx/cost.hpp"
#include "fasterx/ops.hpp"

namespace fasterx {

std::string to_string(HeadMode m) {
  switch (m) {
    case HeadMode::kPlain: return "plain";
    case HeadMode::kDS: return "ds";
    case HeadMode::kPixSF: return "pixsf";
    case HeadMode::kDSPixSF: return "ds+pixsf";
  }
  return "?";
}

HeadMode parse_head_mode(const std::string& s) {
  if (s == "plain" || s == "conv") return HeadMode::kPlain;
  if (s == "ds") return HeadMode::kDS;
  if (s == "pixsf") return HeadMode::kPixSF;
  if (s == "ds+pixsf") return HeadMode::kDSPixSF;
  throw std::invalid_argument("unknown head mode '" + s + "' (plain|ds|pixsf|ds+pixsf)");
}

double prior_bias() { return -std::log((1.0 - 0.01) / 0.01); }

namespace {

std::shared_ptr<ConvBlock> predictor(int in, int out, double bias, Rng& rng) {
  auto p = std::make_shared<ConvBlock>(
      ConvSpec{.in = in, .out = out, .bias = true, .norm = false, .act = Activation::kIdentity},
      rng);
  if (!std::isnan(bias)) {
    for (auto& v : p->bias().data()) v = bias;
  }
  return p;
}

}  // namespace

void DetectHead::build_streams(const HeadConfig& cfg, int out_mult, Rng& rng) {
  const bool sep = is_separable(cfg.mode);
  const ConvSpec spec{.in = hidden_, .out = hidden_, .kernel = 3};
  for (int i = 0; i < 2; ++i) {
    cls_convs_.push_back(register_module("cls_convs." + std::to_string(i), make_conv(spec, sep, rng)));
  }
  for (int i = 0; i < 2; ++i) {
    reg_convs_.push_back(register_module("reg_convs." + std::to_string(i), make_conv(spec, sep, rng)));
  }
  cls_pred_ = register_module("cls_pred",
                              predictor(hidden_, out_mult * cfg.num_classes, prior_bias(), rng));
  reg_pred_ = register_module("reg_pred", predictor(hidden_, out_mult * 4, NAN, rng));
  obj_pred_ = register_module("obj_pred", predictor(hidden_, out_mult, prior_bias(), rng));
}

void DetectHead::run_streams(const Tensor& x, HeadOutput& out) {
  Tensor c = x;
  for (auto& b : cls_convs_) c = b->forward(c);
  out.cls = cls_pred_->forward(c);
  Tensor r = x;
  for (auto& b : reg_convs_) r = b->forward(r);
  out.reg = reg_pred_->forward(r);
  out.obj = obj_pred_->forward(r);
}

PlainHead::PlainHead(int in, const HeadConfig& cfg, Rng& rng) {
  hidden_ = cfg.hidden;
  stem_ = register_module("stem", std::make_shared<ConvBlock>(ConvSpec{.in = in, .out = hidden_}, rng));
  if (cfg.attention) cbam_ = register_module("cbam", std::make_shared<CBAM>(hidden_, rng));
  build_streams(cfg, 1, rng);
}

HeadOutput PlainHead::forward(const Tensor& f, int stride) {
  CostScope scope(path());
  HeadOutput out;
  Tensor x = stem_->forward(f);
  if (cbam_) x = cbam_->forward(x);
  out.feature = x;
  run_streams(x, out);
  out.grid = GridSpec{stride, f.dim(2), f.dim(3)};
  return out;
}

PixSFHead::PixSFHead(int in, const HeadConfig& cfg, Rng& rng) : r_(cfg.r) {
  if (r_ < 2) throw std::invalid_argument("PixSFHead: shuffle factor must be >= 2");
  hidden_ = cfg.hidden;
  encoder_ = register_module(
      "encoder", std::make_shared<ConvBlock>(ConvSpec{.in = in * r_ * r_, .out = hidden_}, rng));
  if (cfg.attention) cbam_ = register_module("cbam", std::make_shared<CBAM>(hidden_, rng));
  build_streams(cfg, r_ * r_, rng);
}

HeadOutput PixSFHead::forward(const Tensor& f, int stride) {
  CostScope scope(path());
  if (f.rank() != 4 || f.dim(2) % r_ || f.dim(3) % r_) {
    throw std::invalid_argument("PixSFHead: feature " + shape_str(f.shape()) +
                                " not divisible by r=" + std::to_string(r_));
  }
  HeadOutput out;
  Tensor x = encoder_->forward(ops::focus(f, r_));
  if (cbam_) x = cbam_->forward(x);
  out.feature = x;
  run_streams(x, out);
  out.cls = ops::pixel_shuffle(out.cls, r_);
  out.reg = ops::pixel_shuffle(out.reg, r_);
  out.obj = ops::pixel_shuffle(out.obj, r_);
  out.grid = GridSpec{stride, f.dim(2), f.dim(3)};
  return out;
}

std::shared_ptr<DetectHead> make_head(int in, const HeadConfig& cfg, Rng& rng) {
  if (is_pixsf(cfg.mode)) return std::make_shared<PixSFHead>(in, cfg, rng);
  return std::make_shared<PlainHead>(in, cfg, rng);
}

}  // namespace fasterx
