// include/lidwb/dg.h

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

#ifndef LIDWB_DG_H_
#define LIDWB_DG_H_

#include <map>
#include <string>
#include <vector>

#include "lidwb/nn/models.h"
#include "lidwb/nn/ops.h"

namespace lidwb::dg {

using nn::Real;
using nn::Tensor;

/// Original plus seven augmentation categories.
inline constexpr int kNumPseudoDomains = 8;

enum class DgMode { kNone, kAdversarial, kMultitask, kMmd, kMdMmd };

DgMode ParseDgMode(const std::string& s);
std::string DgModeName(DgMode m);

/// lambda(epoch) = initial for epoch <= hold, then initial + increment *
/// (epoch - hold), capped at `cap`.
struct LambdaSchedule {
  Real initial = 0.1;
  int hold_epochs = 5;
  Real increment = 0.01;
  Real cap = 1.0;

  static LambdaSchedule Default(DgMode mode);
  Real operator()(int epoch) const;
};

Real LambdaFor(DgMode mode, int epoch);

struct DgConfig {
  DgMode mode = DgMode::kNone;
  LambdaSchedule lambda;
  int num_kernels = 5;
  Real sigma_floor = 1e-8;
  /// MD-MMD weights w_1..w_K (index k-1), summing to one.
  std::vector<Real> md_weights;

  void Validate() const;
};

/// Domain logits from the pooled representation. Adversarial mode inserts a
/// sign-flipping gradient reversal in front of the head.
Tensor DomainLogits(const Tensor& pooled, const nn::DomainHead& head, DgMode mode);

/// (1 - lambda) L_lang + lambda L_dom; L_dom must come from DomainLogits in
/// adversarial mode.
Tensor AdversarialLoss(const Tensor& lang_loss, const Tensor& dom_loss, Real lambda);
/// L_lang + lambda L_dom.
Tensor MultitaskLoss(const Tensor& lang_loss, const Tensor& dom_loss, Real lambda);

/// Sum over bandwidths of exp(-|xi - xj|^2 / sigma2_m).
Real MultiKernel(const std::vector<Real>& xi, const std::vector<Real>& xj,
                 const std::vector<Real>& sigma2);

Tensor MmdHat(const Tensor& src, const Tensor& dom, int num_kernels, Real eps = 1e-8);

/// L_lang + lambda * mmd(src, dom); dom is every pseudo-domain row pooled.
Tensor MmdTotalLoss(const Tensor& lang_loss, const Tensor& src, const Tensor& dom, Real lambda,
                    int num_kernels);

/// L_lang + lambda * sum_k w_k mmd(src, domain k). Domains absent from the
/// map contribute nothing.
Tensor MdMmdLoss(const Tensor& lang_loss, const Tensor& src,
                 const std::map<int, Tensor>& per_domain, Real lambda,
                 const std::map<int, Real>& weights, int num_kernels);

/// w_k = d_k / sum_j d_j.
std::map<int, Real> DiversityWeights(const std::map<int, Real>& dkl);

/// Batches for MMD modes: every batch holds at least `min_each` source (label
/// 0) and `min_each` target items whenever the data allow it.
std::vector<std::vector<size_t>> StratifiedBatches(const std::vector<int>& domain_labels,
                                                   int batch_size, int min_each, Rng& rng);

/// Multinomial logistic regression probe on frozen vectors: trained on
/// (train_x, train_y), returns accuracy on (test_x, test_y). Features are
/// standardised with training statistics.
Real LinearProbeAccuracy(const std::vector<std::vector<Real>>& train_x,
                         const std::vector<int>& train_y,
                         const std::vector<std::vector<Real>>& test_x,
                         const std::vector<int>& test_y, int num_classes, uint64_t seed,
                         int epochs = 200);

}  // namespace lidwb::dg

#endif  // LIDWB_DG_H_
