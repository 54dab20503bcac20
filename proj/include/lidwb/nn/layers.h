// include/lidwb/nn/layers.h

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

#ifndef LIDWB_NN_LAYERS_H_
#define LIDWB_NN_LAYERS_H_

#include <string>
#include <vector>

#include "lidwb/nn/ops.h"
#include "lidwb/nn/tensor.h"
#include "lidwb/util/rng.h"

namespace lidwb::nn {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Trainable parameters plus persistent non-trainable buffers, by name.
class ParamSet {
 public:
  /// Weights drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Tensor AddUniform(const std::string& name, const Shape& shape, int64_t fan_in, Rng& rng);
  Tensor AddConstant(const std::string& name, const Shape& shape, Real value);
  Tensor AddBuffer(const std::string& name, const Shape& shape, Real value);

  const std::vector<NamedTensor>& params() const { return params_; }
  const std::vector<NamedTensor>& buffers() const { return buffers_; }
  std::vector<Tensor> ParamTensors() const;
  std::vector<Tensor> BufferTensors() const;
  size_t NumParameters() const;
  void ZeroGrad();
  /// Appends another set's entries under a name prefix.
  void Merge(const std::string& prefix, const ParamSet& other);

 private:
  void CheckNew(const std::string& name) const;
  std::vector<NamedTensor> params_;
  std::vector<NamedTensor> buffers_;
};

struct LinearLayer {
  Tensor w, b;
  LinearLayer() = default;
  LinearLayer(ParamSet* ps, const std::string& name, int64_t in, int64_t out, Rng& rng,
              bool bias = true);
  Tensor operator()(const Tensor& x) const { return Linear(x, w, b); }
};

struct ConvLayer {
  Tensor w, b;
  int dilation = 1;
  ConvLayer() = default;
  ConvLayer(ParamSet* ps, const std::string& name, int64_t in, int64_t out, int kernel,
            int dilation, Rng& rng);
  Tensor operator()(const Tensor& x) const { return Conv1d(x, w, b, dilation); }
};

struct BatchNormLayer {
  Tensor gamma, beta, running_mean, running_var;
  BatchNormLayer() = default;
  BatchNormLayer(ParamSet* ps, const std::string& name, int64_t channels);
  Tensor operator()(const Tensor& x, bool training) const;
};

}  // namespace lidwb::nn

#endif  // LIDWB_NN_LAYERS_H_
