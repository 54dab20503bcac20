// include/lidwb/nn/tensor.h

// Copyright 2026 The lidwb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LIDWB_NN_TENSOR_H_
#define LIDWB_NN_TENSOR_H_

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

namespace lidwb::nn {

using Real = double;
using Shape = std::vector<int64_t>;

int64_t NumElements(const Shape& s);
std::string ShapeString(const Shape& s);

struct Node;
using BackwardFn = std::function<void(Node&)>;

/// Storage plus the tape edge that produced it.
struct Node {
  Shape shape;
  std::vector<Real> value;
  std::vector<Real> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;

  /// Zero-initialised gradient buffer, allocated on demand.
  std::vector<Real>& Grad();
};

/// Reference-semantics handle; copies share storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor Zeros(const Shape& shape, bool requires_grad = false);
  static Tensor Full(const Shape& shape, Real v, bool requires_grad = false);
  static Tensor FromData(const Shape& shape, std::vector<Real> values,
                         bool requires_grad = false);
  static Tensor Scalar(Real v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int64_t dim(size_t i) const { return node_->shape.at(i); }
  size_t rank() const { return node_->shape.size(); }
  size_t size() const { return node_->value.size(); }
  Real* data() { return node_->value.data(); }
  const Real* data() const { return node_->value.data(); }
  std::vector<Real>& values() { return node_->value; }
  const std::vector<Real>& values() const { return node_->value; }
  Real item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool v) { node_->requires_grad = v; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::vector<Real>& grad() { return node_->Grad(); }
  void ZeroGrad() { node_->grad.clear(); }

  /// Reverse-mode accumulation from a scalar.
  void Backward();

  /// Same values, no tape history.
  Tensor Detach() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Disables tape recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

bool GradEnabled();

/// Builds an op result; records `fn` only when some input requires grad.
Tensor MakeResult(const Shape& shape, std::vector<Real> values,
                  std::initializer_list<Tensor> inputs, BackwardFn fn);
Tensor MakeResult(const Shape& shape, std::vector<Real> values,
                  const std::vector<Tensor>& inputs, BackwardFn fn);

/// Gradient buffer of `t` when it takes part in backward, else nullptr.
Real* GradOrNull(const Tensor& t);

}  // namespace lidwb::nn

#endif  // LIDWB_NN_TENSOR_H_
