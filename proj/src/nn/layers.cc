// src/nn/layers.cc

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

#include "lidwb/nn/layers.h"

#include <cmath>

#include "lidwb/util/error.h"

namespace lidwb::nn {

void ParamSet::CheckNew(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) throw Error("duplicate parameter name " + name);
  }
  for (const auto& p : buffers_) {
    if (p.name == name) throw Error("duplicate buffer name " + name);
  }
}

Tensor ParamSet::AddUniform(const std::string& name, const Shape& shape, int64_t fan_in,
                            Rng& rng) {
  CheckNew(name);
  Real bound = 1.0 / std::sqrt(static_cast<Real>(std::max<int64_t>(fan_in, 1)));
  std::vector<Real> v(static_cast<size_t>(NumElements(shape)));
  for (Real& x : v) x = Uniform(rng, -bound, bound);
  Tensor t = Tensor::FromData(shape, std::move(v), true);
  params_.push_back({name, t});
  return t;
}

Tensor ParamSet::AddConstant(const std::string& name, const Shape& shape, Real value) {
  CheckNew(name);
  Tensor t = Tensor::Full(shape, value, true);
  params_.push_back({name, t});
  return t;
}

Tensor ParamSet::AddBuffer(const std::string& name, const Shape& shape, Real value) {
  CheckNew(name);
  Tensor t = Tensor::Full(shape, value, false);
  buffers_.push_back({name, t});
  return t;
}

std::vector<Tensor> ParamSet::ParamTensors() const {
  std::vector<Tensor> out;
  for (const auto& p : params_) out.push_back(p.tensor);
  return out;
}

std::vector<Tensor> ParamSet::BufferTensors() const {
  std::vector<Tensor> out;
  for (const auto& p : buffers_) out.push_back(p.tensor);
  return out;
}

size_t ParamSet::NumParameters() const {
  size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

void ParamSet::ZeroGrad() {
  for (auto& p : params_) p.tensor.ZeroGrad();
}

void ParamSet::Merge(const std::string& prefix, const ParamSet& other) {
  for (const auto& p : other.params_) {
    CheckNew(prefix + p.name);
    params_.push_back({prefix + p.name, p.tensor});
  }
  for (const auto& p : other.buffers_) {
    CheckNew(prefix + p.name);
    buffers_.push_back({prefix + p.name, p.tensor});
  }
}

LinearLayer::LinearLayer(ParamSet* ps, const std::string& name, int64_t in, int64_t out, Rng& rng,
                         bool bias) {
  w = ps->AddUniform(name + ".w", {out, in}, in, rng);
  if (bias) b = ps->AddUniform(name + ".b", {out}, in, rng);
}

ConvLayer::ConvLayer(ParamSet* ps, const std::string& name, int64_t in, int64_t out, int kernel,
                     int dil, Rng& rng)
    : dilation(dil) {
  w = ps->AddUniform(name + ".w", {out, in, kernel}, in * kernel, rng);
  b = ps->AddUniform(name + ".b", {out}, in * kernel, rng);
}

BatchNormLayer::BatchNormLayer(ParamSet* ps, const std::string& name, int64_t channels) {
  gamma = ps->AddConstant(name + ".gamma", {channels}, 1.0);
  beta = ps->AddConstant(name + ".beta", {channels}, 0.0);
  running_mean = ps->AddBuffer(name + ".running_mean", {channels}, 0.0);
  running_var = ps->AddBuffer(name + ".running_var", {channels}, 1.0);
}

Tensor BatchNormLayer::operator()(const Tensor& x, bool training) const {
  Tensor rm = running_mean, rv = running_var;
  return BatchNorm(x, gamma, beta, training, &rm.values(), &rv.values());
}

}  // namespace lidwb::nn
