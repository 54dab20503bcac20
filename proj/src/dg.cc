// src/dg.cc

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

#include "lidwb/dg.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lidwb/nn/train.h"
#include "lidwb/util/error.h"

namespace lidwb::dg {

DgMode ParseDgMode(const std::string& s) {
  if (s == "none") return DgMode::kNone;
  if (s == "adversarial") return DgMode::kAdversarial;
  if (s == "multitask") return DgMode::kMultitask;
  if (s == "mmd") return DgMode::kMmd;
  if (s == "md_mmd" || s == "md-mmd") return DgMode::kMdMmd;
  throw Error("unknown DG mode: " + s);
}

std::string DgModeName(DgMode m) {
  switch (m) {
    case DgMode::kNone: return "none";
    case DgMode::kAdversarial: return "adversarial";
    case DgMode::kMultitask: return "multitask";
    case DgMode::kMmd: return "mmd";
    case DgMode::kMdMmd: return "md_mmd";
  }
  return "?";
}

LambdaSchedule LambdaSchedule::Default(DgMode mode) {
  if (mode == DgMode::kAdversarial) return {0.001, 15, 0.01, 1.0};
  return {0.1, 5, 0.01, 1.0};
}

Real LambdaSchedule::operator()(int epoch) const {
  if (epoch < 1) throw Error("lambda schedule: epochs are 1-based");
  Real v = initial;
  if (epoch > hold_epochs) v += increment * (epoch - hold_epochs);
  return std::min(v, cap);
}

Real LambdaFor(DgMode mode, int epoch) { return LambdaSchedule::Default(mode)(epoch); }

void DgConfig::Validate() const {
  if (num_kernels < 1) throw Error("DG: need at least one kernel");
  if (lambda.initial < 0.0 || lambda.increment < 0.0) throw Error("DG: lambda must be >= 0");
  if (mode == DgMode::kAdversarial && lambda.cap > 1.0) {
    throw Error("DG: adversarial lambda must stay within [0, 1]");
  }
  if (mode == DgMode::kMdMmd) {
    if (md_weights.size() != kNumPseudoDomains - 1) {
      throw Error("DG: MD-MMD needs one weight per augmentation category");
    }
    Real s = 0.0;
    for (Real w : md_weights) {
      if (w < 0.0) throw Error("DG: MD-MMD weights must be non-negative");
      s += w;
    }
    if (std::fabs(s - 1.0) > 1e-9) throw Error("DG: MD-MMD weights must sum to one");
  }
}

Tensor DomainLogits(const Tensor& pooled, const nn::DomainHead& head, DgMode mode) {
  if (mode == DgMode::kAdversarial) return head(nn::GradReverse(pooled, 1.0));
  return head(pooled);
}

Tensor AdversarialLoss(const Tensor& lang_loss, const Tensor& dom_loss, Real lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("adversarial loss: lambda outside [0, 1]");
  return nn::Add(nn::Scale(lang_loss, 1.0 - lambda), nn::Scale(dom_loss, lambda));
}

Tensor MultitaskLoss(const Tensor& lang_loss, const Tensor& dom_loss, Real lambda) {
  if (lambda < 0.0) throw Error("multitask loss: lambda must be >= 0");
  return nn::Add(lang_loss, nn::Scale(dom_loss, lambda));
}

Real MultiKernel(const std::vector<Real>& xi, const std::vector<Real>& xj,
                 const std::vector<Real>& sigma2) {
  if (xi.size() != xj.size()) throw Error("kernel: dimension mismatch");
  Real d = 0.0;
  for (size_t k = 0; k < xi.size(); ++k) d += (xi[k] - xj[k]) * (xi[k] - xj[k]);
  Real s = 0.0;
  for (Real s2 : sigma2) s += std::exp(-d / s2);
  return s;
}

Tensor MmdHat(const Tensor& src, const Tensor& dom, int num_kernels, Real eps) {
  return nn::MmdHat(src, dom, num_kernels, eps);
}

Tensor MmdTotalLoss(const Tensor& lang_loss, const Tensor& src, const Tensor& dom, Real lambda,
                    int num_kernels) {
  if (!src.defined() || src.dim(0) == 0) throw Error("empty source set");
  if (!dom.defined() || dom.dim(0) == 0) throw Error("empty target set");
  return nn::Add(lang_loss, nn::Scale(nn::MmdHat(src, dom, num_kernels), lambda));
}

Tensor MdMmdLoss(const Tensor& lang_loss, const Tensor& src,
                 const std::map<int, Tensor>& per_domain, Real lambda,
                 const std::map<int, Real>& weights, int num_kernels) {
  if (!src.defined() || src.dim(0) == 0) throw Error("empty source set");
  std::vector<Tensor> terms = {lang_loss};
  for (const auto& [k, embs] : per_domain) {
    if (!embs.defined() || embs.dim(0) == 0) continue;
    auto w = weights.find(k);
    if (w == weights.end()) throw Error("MD-MMD: no weight for domain " + std::to_string(k));
    if (w->second == 0.0) continue;
    terms.push_back(nn::Scale(nn::MmdHat(src, embs, num_kernels), lambda * w->second));
  }
  return nn::AddN(terms);
}

std::map<int, Real> DiversityWeights(const std::map<int, Real>& dkl) {
  Real total = 0.0;
  for (const auto& [k, v] : dkl) {
    if (!(v >= 0.0)) throw Error("diversity weights: divergences must be >= 0");
    total += v;
  }
  if (!(total > 0.0)) throw Error("diversity weights: all divergences are zero");
  std::map<int, Real> w;
  for (const auto& [k, v] : dkl) w[k] = v / total;
  return w;
}

std::vector<std::vector<size_t>> StratifiedBatches(const std::vector<int>& domain_labels,
                                                   int batch_size, int min_each, Rng& rng) {
  std::vector<size_t> src, tgt;
  for (size_t i = 0; i < domain_labels.size(); ++i) {
    (domain_labels[i] == 0 ? src : tgt).push_back(i);
  }
  std::shuffle(src.begin(), src.end(), rng);
  std::shuffle(tgt.begin(), tgt.end(), rng);
  const size_t n = domain_labels.size();
  if (n == 0) return {};
  size_t num_batches = (n + batch_size - 1) / batch_size;
  if (min_each > 0) {
    size_t limit = std::min(src.size(), tgt.size()) / static_cast<size_t>(min_each);
    num_batches = std::max<size_t>(1, std::min(num_batches, limit));
  }
  // Deal each stratum round-robin so the proportions match in every batch.
  std::vector<std::vector<size_t>> batches(num_batches);
  for (size_t i = 0; i < src.size(); ++i) batches[i % num_batches].push_back(src[i]);
  for (size_t i = 0; i < tgt.size(); ++i) batches[i % num_batches].push_back(tgt[i]);
  for (auto& b : batches) std::shuffle(b.begin(), b.end(), rng);
  return batches;
}

Real LinearProbeAccuracy(const std::vector<std::vector<Real>>& train_x,
                         const std::vector<int>& train_y,
                         const std::vector<std::vector<Real>>& test_x,
                         const std::vector<int>& test_y, int num_classes, uint64_t seed,
                         int epochs) {
  if (train_x.empty() || test_x.empty()) throw Error("probe: empty data");
  if (train_x.size() != train_y.size() || test_x.size() != test_y.size()) {
    throw Error("probe: label count mismatch");
  }
  const size_t d = train_x[0].size();
  std::vector<Real> mean(d, 0.0), sd(d, 0.0);
  for (const auto& x : train_x) {
    for (size_t k = 0; k < d; ++k) mean[k] += x[k];
  }
  for (Real& m : mean) m /= static_cast<Real>(train_x.size());
  for (const auto& x : train_x) {
    for (size_t k = 0; k < d; ++k) sd[k] += (x[k] - mean[k]) * (x[k] - mean[k]);
  }
  for (Real& s : sd) s = std::sqrt(s / static_cast<Real>(train_x.size())) + 1e-8;
  auto pack = [&](const std::vector<std::vector<Real>>& xs) {
    std::vector<Real> v;
    v.reserve(xs.size() * d);
    for (const auto& x : xs) {
      if (x.size() != d) throw Error("probe: inconsistent dimensions");
      for (size_t k = 0; k < d; ++k) v.push_back((x[k] - mean[k]) / sd[k]);
    }
    return Tensor::FromData({static_cast<int64_t>(xs.size()), static_cast<int64_t>(d)},
                            std::move(v));
  };
  Tensor xtr = pack(train_x), xte = pack(test_x);
  nn::ParamSet ps;
  Rng rng(seed);
  nn::LinearLayer layer(&ps, "probe", static_cast<int64_t>(d), num_classes, rng);
  nn::TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.weight_decay = 0.01;
  nn::AdamW opt(ps.ParamTensors(), cfg);
  Tensor targets = nn::OneHot(train_y, num_classes);
  for (int e = 0; e < epochs; ++e) {
    opt.ZeroGrad();
    Tensor loss = nn::SoftCrossEntropy(layer(xtr), targets);
    loss.Backward();
    opt.Step();
  }
  nn::NoGradGuard guard;
  Tensor logits = layer(xte);
  size_t correct = 0;
  for (size_t i = 0; i < test_y.size(); ++i) {
    const Real* row = logits.data() + i * num_classes;
    int arg = static_cast<int>(std::max_element(row, row + num_classes) - row);
    if (arg == test_y[i]) ++correct;
  }
  return static_cast<Real>(correct) / static_cast<Real>(test_y.size());
}

}  // namespace lidwb::dg
