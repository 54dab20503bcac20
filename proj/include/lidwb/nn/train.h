// include/lidwb/nn/train.h

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

#ifndef LIDWB_NN_TRAIN_H_
#define LIDWB_NN_TRAIN_H_

#include <functional>
#include <vector>

#include "lidwb/nn/tensor.h"
#include "lidwb/util/rng.h"

namespace lidwb::nn {

struct TrainConfig {
  int batch_size = 32;
  Real learning_rate = 1e-3;
  Real weight_decay = 0.01;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real adam_eps = 1e-8;
  int max_epochs = 30;
  int early_stop_patience = 5;
  Real plateau_factor = 0.5;
  int plateau_patience = 2;
  Real min_learning_rate = 1e-6;
  bool restore_best = true;
  uint64_t seed = 0;
};

/// Decoupled weight decay Adam.
class AdamW {
 public:
  AdamW(std::vector<Tensor> params, const TrainConfig& cfg);
  /// Applies one update from the accumulated gradients.
  void Step();
  void ZeroGrad();
  Real learning_rate() const { return lr_; }
  void set_learning_rate(Real lr) { lr_ = lr; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<Real>> m_, v_;
  Real lr_, wd_, b1_, b2_, eps_;
  int64_t t_ = 0;
};

/// Reduce-on-plateau: multiplies the rate by `factor` after more than
/// `patience` epochs without improvement.
class PlateauScheduler {
 public:
  PlateauScheduler(Real factor, int patience, Real min_lr)
      : factor_(factor), patience_(patience), min_lr_(min_lr) {}
  /// Returns true when the rate was reduced.
  bool Observe(Real metric, AdamW* opt);

 private:
  Real factor_;
  int patience_;
  Real min_lr_;
  Real best_ = 0.0;
  bool has_best_ = false;
  int bad_epochs_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  Real train_loss = 0.0;
  Real val_loss = 0.0;
  Real learning_rate = 0.0;
  bool lr_reduced = false;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  int lr_reductions = 0;
  bool early_stopped = false;
};

/// Callbacks that define one training problem.
struct TrainHooks {
  /// Mini-batches (item indices) for a 1-based epoch.
  std::function<std::vector<std::vector<size_t>>(int epoch, Rng& rng)> make_batches;
  /// Scalar loss with tape for one batch.
  std::function<Tensor(const std::vector<size_t>& batch, int epoch, Rng& rng)> batch_loss;
  /// Loss on held-out data, evaluated without tape.
  std::function<Real(int epoch)> validation_loss;
};

/// Runs epochs until max_epochs or early stopping; on return the parameters
/// (and buffers) hold the best-validation snapshot when restore_best is set.
TrainHistory Train(const std::vector<Tensor>& params, const std::vector<Tensor>& buffers,
                   const TrainHooks& hooks, const TrainConfig& cfg);

/// Shuffled consecutive batches of `n` items.
std::vector<std::vector<size_t>> ShuffledBatches(size_t n, int batch_size, Rng& rng,
                                                 bool drop_last = false);

}  // namespace lidwb::nn

#endif  // LIDWB_NN_TRAIN_H_
