/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fasterx {

using Shape = std::vector<int>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tensor;
struct TensorImpl;

// Called once per node during backward with the node's own output, whose
// grad is fully accumulated at that point.
using BackwardFn = std::function<void(const TensorImpl& out)>;

struct GradNode {
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  BackwardFn backward;
};

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  bool meta = false;
  std::shared_ptr<GradNode> node;

  void ensure_grad();
};

// Dense row-major real tensor with reverse-mode autodiff. Copies are shallow
// (they alias the same storage); use clone() for a deep copy.
//
// A "meta" tensor carries a shape but no storage. Ops propagate meta tensors
// shape-only, which is how the profiler traces a network without running it.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0, bool requires_grad = false);

  static Tensor from_vector(Shape shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor meta(Shape shape);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  int rank() const;
  int dim(int axis) const;
  int64_t numel() const;
  bool is_meta() const;

  std::span<double> data();
  std::span<const double> data() const;
  double item() const;
  double operator[](int64_t i) const { return impl_->data[i]; }

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on);
  bool has_grad() const;
  std::span<const double> grad() const;
  // Handles are shallow, so this is const like a pointer deref.
  std::span<double> mutable_grad() const;
  void zero_grad();

  // Seeds d(self)/d(self) = 1; self must hold a single element.
  void backward() const;
  void backward(std::span<const double> seed) const;

  // Fresh leaf with a copy of the values; no history.
  Tensor detach() const;
  Tensor clone() const;

  // Copy under a new shape with the same element count; grads flow back.
  Tensor reshape(Shape shape) const;

  TensorImpl* impl() const { return impl_.get(); }
  const std::shared_ptr<TensorImpl>& impl_ptr() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<TensorImpl> impl_;

  friend Tensor make_result(Shape shape, const std::vector<Tensor>& inputs);
};

// --- autograd plumbing for op implementers ---------------------------------

bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Allocates an output for an op over `inputs`. The result is meta if any
// input is meta, and requires grad if grad mode is on and any input does.
Tensor make_result(Shape shape, const std::vector<Tensor>& inputs);

// Records `fn` as the backward of `out` when out requires grad.
void attach_backward(Tensor& out, const std::vector<Tensor>& inputs, BackwardFn fn);

bool any_meta(const std::vector<Tensor>& inputs);

// --- matrix multiply --------------------------------------------------------

enum class MatmulPrecision { kFloat64, kFloat32 };

// Training may trade GEMM precision for speed; gradient checks need kFloat64.
void set_matmul_precision(MatmulPrecision p);
MatmulPrecision matmul_precision();

// C = alpha * op(A) * op(B) + beta * C, row-major.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a,
          int lda, const double* b, int ldb, double beta, double* c, int ldc);

}  // namespace fasterx
