// include/lidwb/nn/ops.h

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

#ifndef LIDWB_NN_OPS_H_
#define LIDWB_NN_OPS_H_

#include <vector>

#include "lidwb/nn/tensor.h"
#include "lidwb/util/rng.h"

namespace lidwb::nn {

// Elementwise. Binary ops require identical shapes.
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& x, Real s);
Tensor AddScalar(const Tensor& x, Real c);
Tensor Relu(const Tensor& x);
Tensor Sigmoid(const Tensor& x);
Tensor Tanh(const Tensor& x);

/// Scalar reductions over all elements.
Tensor Sum(const Tensor& x);
Tensor Mean(const Tensor& x);
/// Sum of the given scalars.
Tensor AddN(const std::vector<Tensor>& terms);

Tensor Reshape(const Tensor& x, const Shape& shape);

/// [m, k] x [k, n].
Tensor MatMul(const Tensor& a, const Tensor& b);
/// x [N, in] W^T + b, with W [out, in] and optional b [out].
Tensor Linear(const Tensor& x, const Tensor& w, const Tensor& b = Tensor());

/// x [B, Cin, T], w [Cout, Cin, k] (odd k), optional b [Cout]; zero "same"
/// padding, so output is [B, Cout, T].
Tensor Conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int dilation = 1);

/// Batch normalisation over [B, C] or [B, C, T] (statistics over all but the
/// channel axis). In training mode the running statistics are updated.
Tensor BatchNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, bool training,
                 std::vector<Real>* running_mean, std::vector<Real>* running_var,
                 Real momentum = 0.1, Real eps = 1e-5);

/// Over the last axis.
Tensor Softmax(const Tensor& x);
Tensor LogSoftmax(const Tensor& x);

/// Floor added to the variance before the square root in pooling.
inline constexpr Real kPoolVarianceFloor = 1e-10;

/// [B, C, T] -> [B, 2C]: per-channel mean then standard deviation.
Tensor MeanStdPool(const Tensor& x);
/// Weighted statistics with per-channel weights alpha [B, C, T] summing to
/// one over T.
Tensor AttentiveStatPool(const Tensor& x, const Tensor& alpha);
/// [B, C, T] -> [B, C].
Tensor MeanTime(const Tensor& x);
/// [B, C] -> [B, C, T].
Tensor BroadcastTime(const Tensor& x, int64_t t);
/// x [B, C, T] scaled by g [B, C].
Tensor MulBroadcastTime(const Tensor& x, const Tensor& g);

/// Concatenation along axis 1 of rank-2 or rank-3 tensors.
Tensor Concat(const std::vector<Tensor>& parts);
/// Channels [start, start + len) along axis 1.
Tensor SliceChannels(const Tensor& x, int64_t start, int64_t len);

/// Rows scaled to unit L2 norm (norm floored at eps).
Tensor L2NormalizeRows(const Tensor& x, Real eps = 1e-12);

/// Inverted dropout; identity outside training.
Tensor Dropout(const Tensor& x, Real p, Rng& rng, bool training);

/// Identity forward; backward multiplies the gradient by -scale.
Tensor GradReverse(const Tensor& x, Real scale);

/// Mean over rows of -sum_j targets_ij log softmax(logits)_ij.
Tensor SoftCrossEntropy(const Tensor& logits, const Tensor& targets);
Tensor CrossEntropy(const Tensor& logits, const std::vector<int>& labels);
Tensor OneHot(const std::vector<int>& labels, int num_classes);

struct AmSoftmaxConfig {
  Real scale = 30.0;
  Real margin = 0.2;
};

/// s * cos(theta) between normalised rows of emb [N, D] and w [L, D].
Tensor CosineLogits(const Tensor& emb, const Tensor& w, Real scale);
/// Cross-entropy of s * (cos - m * target) against (possibly soft) targets.
Tensor AmSoftmaxLoss(const Tensor& emb, const Tensor& w, const Tensor& targets,
                     const AmSoftmaxConfig& cfg);

/// Biased squared MMD between row sets a [Ns, D] and b [Nd, D] under a sum
/// of M Gaussian kernels with bandwidths 2^m times the mean cross-set squared
/// distance (m = 1..M), each floored at eps.
Tensor MmdHat(const Tensor& a, const Tensor& b, int num_kernels, Real eps = 1e-8);

/// Bandwidths used by MmdHat for these sets.
std::vector<Real> MmdBandwidths(const Tensor& a, const Tensor& b, int num_kernels,
                                Real eps = 1e-8);

/// Rows `idx` of x [N, ...].
Tensor GatherRows(const Tensor& x, const std::vector<int>& idx);

}  // namespace lidwb::nn

#endif  // LIDWB_NN_OPS_H_
