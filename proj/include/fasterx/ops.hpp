/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <vector>

#include "fasterx/tensor.hpp"

// Differentiable tensor operations. Feature maps are NCHW. Every op records
// its analytic cost with the active CostRecorder (see cost.hpp) and accepts
// meta tensors.
namespace fasterx::ops {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// Elementwise product; b broadcasts over a where b's dim is 1.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

Tensor sigmoid(const Tensor& x);
Tensor silu(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// Mean of squared elementwise differences.
Tensor mse(const Tensor& a, const Tensor& b);

// Weight [Cout, Cin/groups, k, k]; bias may be undefined.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding,
              int groups);

// Training mode normalizes with batch statistics and updates the running
// buffers in place (running = (1 - momentum) * running + momentum * batch).
// fuse_silu applies SiLU to the result in the same node; the output's grad
// buffer is consumed by backward in that case.
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor running_mean,
                  Tensor running_var, bool training, double momentum, double eps,
                  bool fuse_silu = false);

Tensor concat_channels(const std::vector<Tensor>& xs);
Tensor upsample_nearest(const Tensor& x, int factor);
// Stride-1 max pooling with "same" padding; kernel must be odd.
Tensor max_pool2d(const Tensor& x, int kernel);
Tensor global_avg_pool(const Tensor& x);
Tensor global_max_pool(const Tensor& x);
Tensor channel_mean(const Tensor& x);
Tensor channel_max(const Tensor& x);

// Space-to-depth: out[c*r*r + i*r + j, h, w] = x[c, h*r + i, w*r + j].
// Accepts [C,H,W] or [N,C,H,W].
Tensor focus(const Tensor& x, int r);
// Depth-to-space, the exact inverse of focus.
Tensor pixel_shuffle(const Tensor& x, int r);

}  // namespace fasterx::ops
