/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/tensor.hpp"

#include <cblas.h>

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace fasterx {

int64_t shape_numel(const Shape& shape) {
  int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("negative dimension in shape " + shape_str(shape));
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

void TensorImpl::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

Tensor::Tensor(Shape shape, double fill, bool requires_grad)
    : impl_(std::make_shared<TensorImpl>()) {
  impl_->data.assign(static_cast<size_t>(shape_numel(shape)), fill);
  impl_->shape = std::move(shape);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::from_vector(Shape shape, std::vector<double> values, bool requires_grad) {
  if (static_cast<int64_t>(values.size()) != shape_numel(shape)) {
    throw std::invalid_argument("from_vector: " + std::to_string(values.size()) +
                                " values do not fill shape " + shape_str(shape));
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::meta(Shape shape) {
  shape_numel(shape);
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->meta = true;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_vector({}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return impl_->shape; }
int Tensor::rank() const { return static_cast<int>(impl_->shape.size()); }

int Tensor::dim(int axis) const {
  const int r = rank();
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) throw std::out_of_range("dim: axis out of range");
  return impl_->shape[axis];
}

int64_t Tensor::numel() const { return shape_numel(impl_->shape); }
bool Tensor::is_meta() const { return impl_->meta; }

std::span<double> Tensor::data() { return impl_->data; }
std::span<const double> Tensor::data() const { return impl_->data; }

double Tensor::item() const {
  if (impl_->data.size() != 1) throw std::logic_error("item() on a tensor with != 1 element");
  return impl_->data[0];
}

bool Tensor::requires_grad() const { return impl_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  return *this;
}

bool Tensor::has_grad() const { return !impl_->grad.empty(); }
std::span<const double> Tensor::grad() const { return impl_->grad; }

std::span<double> Tensor::mutable_grad() const {
  impl_->ensure_grad();
  return impl_->grad;
}

void Tensor::zero_grad() { std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0); }

void Tensor::backward() const {
  if (impl_->data.size() != 1) throw std::logic_error("backward() needs a scalar output");
  const double one = 1.0;
  backward(std::span<const double>(&one, 1));
}

void Tensor::backward(std::span<const double> seed) const {
  if (seed.size() != impl_->data.size()) throw std::invalid_argument("backward: seed size");
  if (!impl_->requires_grad) throw std::logic_error("backward: tensor does not require grad");

  // Post-order DFS gives a topological order of the reachable graph.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> seen;
  std::vector<std::pair<TensorImpl*, size_t>> stack{{impl_.get(), 0}};
  seen.insert(impl_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const auto* gn = node->node.get();
    if (gn && next < gn->inputs.size()) {
      TensorImpl* child = gn->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.push_back({child, 0});
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }

  impl_->ensure_grad();
  for (size_t i = 0; i < seed.size(); ++i) impl_->grad[i] += seed[i];
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl* t = *it;
    if (t->node && !t->grad.empty()) t->node->backward(*t);
  }
  // Release the graph; intermediate grads are no longer needed.
  for (TensorImpl* t : order) {
    if (t->node) {
      t->node.reset();
      if (t != impl_.get()) std::vector<double>().swap(t->grad);
    }
  }
}

Tensor Tensor::detach() const {
  if (impl_->meta) return meta(impl_->shape);
  return from_vector(impl_->shape, impl_->data, false);
}

Tensor Tensor::clone() const {
  Tensor t = detach();
  t.impl_->requires_grad = impl_->requires_grad;
  return t;
}

Tensor Tensor::reshape(Shape shape) const {
  if (shape_numel(shape) != numel()) {
    throw std::invalid_argument("reshape: " + shape_str(impl_->shape) + " -> " + shape_str(shape));
  }
  Tensor out = make_result(std::move(shape), {*this});
  if (out.is_meta()) return out;
  std::copy(impl_->data.begin(), impl_->data.end(), out.data().begin());
  attach_backward(out, {*this}, [x = *this](const TensorImpl& o) mutable {
    auto g = x.mutable_grad();
    for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
  });
  return out;
}

// --- autograd plumbing ------------------------------------------------------

namespace {
thread_local bool t_grad_enabled = true;
thread_local MatmulPrecision t_precision = MatmulPrecision::kFloat64;
}  // namespace

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

bool any_meta(const std::vector<Tensor>& inputs) {
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor& t) { return t.defined() && t.is_meta(); });
}

Tensor make_result(Shape shape, const std::vector<Tensor>& inputs) {
  if (any_meta(inputs)) return Tensor::meta(std::move(shape));
  auto impl = std::make_shared<TensorImpl>();
  impl->data.assign(static_cast<size_t>(shape_numel(shape)), 0.0);
  impl->shape = std::move(shape);
  impl->requires_grad =
      t_grad_enabled && std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) {
        return t.defined() && t.requires_grad();
      });
  return Tensor(std::move(impl));
}

void attach_backward(Tensor& out, const std::vector<Tensor>& inputs, BackwardFn fn) {
  if (!out.requires_grad()) return;
  auto node = std::make_shared<GradNode>();
  for (const auto& t : inputs) {
    if (t.defined()) node->inputs.push_back(t.impl_ptr());
  }
  node->backward = std::move(fn);
  out.impl()->node = std::move(node);
}

// --- gemm -------------------------------------------------------------------

void set_matmul_precision(MatmulPrecision p) { t_precision = p; }
MatmulPrecision matmul_precision() { return t_precision; }

void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a,
          int lda, const double* b, int ldb, double beta, double* c, int ldc) {
  if (m == 0 || n == 0) return;
  const auto ta = trans_a ? CblasTrans : CblasNoTrans;
  const auto tb = trans_b ? CblasTrans : CblasNoTrans;
  if (t_precision == MatmulPrecision::kFloat64) {
    cblas_dgemm(CblasRowMajor, ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
    return;
  }
  const size_t a_rows = trans_a ? k : m;
  const size_t b_rows = trans_b ? n : k;
  thread_local std::vector<float> fa, fb, fc;
  fa.resize(a_rows * lda);
  fb.resize(b_rows * ldb);
  fc.resize(static_cast<size_t>(m) * n);
  std::copy(a, a + a_rows * lda, fa.begin());
  std::copy(b, b + b_rows * ldb, fb.begin());
  cblas_sgemm(CblasRowMajor, ta, tb, m, n, k, 1.0f, fa.data(), lda, fb.data(), ldb, 0.0f,
              fc.data(), n);
  for (int i = 0; i < m; ++i) {
    double* crow = c + static_cast<size_t>(i) * ldc;
    const float* frow = fc.data() + static_cast<size_t>(i) * n;
    if (beta == 0.0) {
      for (int j = 0; j < n; ++j) crow[j] = alpha * frow[j];
    } else {
      for (int j = 0; j < n; ++j) crow[j] = beta * crow[j] + alpha * frow[j];
    }
  }
}

}  // namespace fasterx
