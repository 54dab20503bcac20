// src/nn/train.cc

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

#include "lidwb/nn/train.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lidwb/util/error.h"

namespace lidwb::nn {

AdamW::AdamW(std::vector<Tensor> params, const TrainConfig& cfg)
    : params_(std::move(params)),
      lr_(cfg.learning_rate),
      wd_(cfg.weight_decay),
      b1_(cfg.beta1),
      b2_(cfg.beta2),
      eps_(cfg.adam_eps) {
  for (const Tensor& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void AdamW::Step() {
  ++t_;
  const Real c1 = 1.0 - std::pow(b1_, static_cast<Real>(t_));
  const Real c2 = 1.0 - std::pow(b2_, static_cast<Real>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    if (!p.has_grad()) continue;
    const std::vector<Real>& g = p.grad();
    std::vector<Real>& w = p.values();
    std::vector<Real>& m = m_[i];
    std::vector<Real>& v = v_[i];
    for (size_t k = 0; k < w.size(); ++k) {
      m[k] = b1_ * m[k] + (1.0 - b1_) * g[k];
      v[k] = b2_ * v[k] + (1.0 - b2_) * g[k] * g[k];
      w[k] -= lr_ * wd_ * w[k];
      w[k] -= lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
    }
  }
}

void AdamW::ZeroGrad() {
  for (Tensor& p : params_) p.ZeroGrad();
}

bool PlateauScheduler::Observe(Real metric, AdamW* opt) {
  if (!has_best_ || metric < best_) {
    best_ = metric;
    has_best_ = true;
    bad_epochs_ = 0;
    return false;
  }
  if (++bad_epochs_ > patience_) {
    bad_epochs_ = 0;
    Real lr = std::max(min_lr_, opt->learning_rate() * factor_);
    bool reduced = lr < opt->learning_rate();
    opt->set_learning_rate(lr);
    return reduced;
  }
  return false;
}

std::vector<std::vector<size_t>> ShuffledBatches(size_t n, int batch_size, Rng& rng,
                                                 bool drop_last) {
  if (batch_size < 1) throw Error("batch size must be positive");
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<size_t>> batches;
  for (size_t i = 0; i < n; i += batch_size) {
    size_t end = std::min(n, i + static_cast<size_t>(batch_size));
    if (drop_last && end - i < static_cast<size_t>(batch_size) && !batches.empty()) break;
    batches.emplace_back(order.begin() + static_cast<long>(i),
                         order.begin() + static_cast<long>(end));
  }
  return batches;
}

TrainHistory Train(const std::vector<Tensor>& params, const std::vector<Tensor>& buffers,
                   const TrainHooks& hooks, const TrainConfig& cfg) {
  if (!hooks.make_batches || !hooks.batch_loss || !hooks.validation_loss) {
    throw Error("train: incomplete hooks");
  }
  AdamW opt(params, cfg);
  PlateauScheduler sched(cfg.plateau_factor, cfg.plateau_patience, cfg.min_learning_rate);
  Rng rng(cfg.seed);
  TrainHistory hist;
  Real best = std::numeric_limits<Real>::infinity();
  int since_best = 0;
  std::vector<std::vector<Real>> best_params, best_buffers;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    auto batches = hooks.make_batches(epoch, rng);
    if (batches.empty()) throw Error("train: empty dataset");
    Real total = 0.0;
    size_t count = 0;
    for (const auto& batch : batches) {
      opt.ZeroGrad();
      Tensor loss = hooks.batch_loss(batch, epoch, rng);
      if (!std::isfinite(loss.item())) throw Error("train: non-finite loss");
      loss.Backward();
      opt.Step();
      total += loss.item() * static_cast<Real>(batch.size());
      count += batch.size();
    }
    opt.ZeroGrad();
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = total / static_cast<Real>(count);
    {
      NoGradGuard guard;
      rec.val_loss = hooks.validation_loss(epoch);
    }
    rec.learning_rate = opt.learning_rate();
    rec.lr_reduced = sched.Observe(rec.val_loss, &opt);
    if (rec.lr_reduced) ++hist.lr_reductions;
    hist.epochs.push_back(rec);
    if (rec.val_loss < best) {
      best = rec.val_loss;
      hist.best_epoch = epoch;
      since_best = 0;
      if (cfg.restore_best) {
        best_params.clear();
        best_buffers.clear();
        for (const Tensor& p : params) best_params.push_back(p.values());
        for (const Tensor& b : buffers) best_buffers.push_back(b.values());
      }
    } else if (++since_best >= cfg.early_stop_patience) {
      hist.early_stopped = true;
      break;
    }
  }
  if (cfg.restore_best && !best_params.empty()) {
    for (size_t i = 0; i < params.size(); ++i) Tensor(params[i]).values() = best_params[i];
    for (size_t i = 0; i < buffers.size(); ++i) Tensor(buffers[i]).values() = best_buffers[i];
  }
  return hist;
}

}  // namespace lidwb::nn
