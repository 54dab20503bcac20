// src/nn/tensor.cc

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

#include "lidwb/nn/tensor.h"

#include <algorithm>
#include <unordered_set>

#include "lidwb/util/error.h"

namespace lidwb::nn {
namespace {

thread_local bool g_grad_enabled = true;

}  // namespace

int64_t NumElements(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

std::string ShapeString(const Shape& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

std::vector<Real>& Node::Grad() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor Tensor::Zeros(const Shape& shape, bool requires_grad) {
  return Full(shape, 0.0, requires_grad);
}

Tensor Tensor::Full(const Shape& shape, Real v, bool requires_grad) {
  return FromData(shape, std::vector<Real>(static_cast<size_t>(NumElements(shape)), v),
                  requires_grad);
}

Tensor Tensor::FromData(const Shape& shape, std::vector<Real> values, bool requires_grad) {
  if (static_cast<int64_t>(values.size()) != NumElements(shape)) {
    throw Error("tensor: " + std::to_string(values.size()) + " values for shape " +
                ShapeString(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::Scalar(Real v, bool requires_grad) { return FromData({}, {v}, requires_grad); }

Real Tensor::item() const {
  if (size() != 1) throw Error("item() on tensor of shape " + ShapeString(shape()));
  return node_->value[0];
}

Tensor Tensor::Detach() const { return FromData(shape(), values(), false); }

void Tensor::Backward() {
  if (size() != 1) throw Error("backward: loss must be a scalar, got " + ShapeString(shape()));
  if (!requires_grad()) throw Error("backward: loss does not depend on any tracked tensor");
  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack = {{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, i] = stack.back();
    if (i < n->parents.size()) {
      Node* p = n->parents[i++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  node_->Grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

bool GradEnabled() { return g_grad_enabled; }

Tensor MakeResult(const Shape& shape, std::vector<Real> values, const std::vector<Tensor>& inputs,
                  BackwardFn fn) {
  Tensor out = Tensor::FromData(shape, std::move(values), false);
  if (!g_grad_enabled) return out;
  bool any = std::any_of(inputs.begin(), inputs.end(),
                         [](const Tensor& t) { return t.defined() && t.requires_grad(); });
  if (!any) return out;
  Node* n = out.node();
  n->requires_grad = true;
  for (const Tensor& t : inputs) {
    if (t.defined() && t.requires_grad()) n->parents.push_back(t.ptr());
  }
  n->backward = std::move(fn);
  return out;
}

Tensor MakeResult(const Shape& shape, std::vector<Real> values,
                  std::initializer_list<Tensor> inputs, BackwardFn fn) {
  return MakeResult(shape, std::move(values), std::vector<Tensor>(inputs), std::move(fn));
}

Real* GradOrNull(const Tensor& t) {
  if (!t.defined() || !t.requires_grad()) return nullptr;
  return t.node()->Grad().data();
}

}  // namespace lidwb::nn
