// include/lidwb/nn/models.h

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

#ifndef LIDWB_NN_MODELS_H_
#define LIDWB_NN_MODELS_H_

#include <string>
#include <vector>

#include "lidwb/features.h"
#include "lidwb/nn/layers.h"

namespace lidwb::nn {

enum class ModelFamily { kXvector, kEcapa };

ModelFamily ParseModelFamily(const std::string& s);
std::string ModelFamilyName(ModelFamily f);

struct ModelConfig {
  ModelFamily family = ModelFamily::kEcapa;
  int input_dim = 20;
  int channels = 64;
  int embedding_dim = 32;
  int num_languages = 2;
  /// x-vector: width of the last frame layer (pooled to twice this) and of
  /// the first segment layer.
  int xvector_stats_dim = 192;
  int xvector_segment_dim = 64;
  /// ECAPA-TDNN block settings.
  int first_kernel = 5;
  int res2_scale = 4;
  int se_ratio = 8;
  int attention_dim = 32;
  std::vector<int> dilations = {2, 3, 4};
  Real dropout = 0.25;
  AmSoftmaxConfig am;

  /// Full-size widths: 512 channels, ECAPA 192-d embedding, x-vector 1500-d stats.
  static ModelConfig FullScale(ModelFamily family, int input_dim, int num_languages);
  void Validate() const;
};

/// Frame-level encoder, pooling, embedding layer and AM-softmax language
/// classifier.
class LidModel {
 public:
  LidModel(const ModelConfig& cfg, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  /// x [B, F, T] -> pooled utterance representation Z [B, PooledDim()].
  Tensor Encode(const Tensor& x, bool training) const;
  int64_t PooledDim() const;
  /// Linear layer output used as the utterance embedding.
  Tensor EmbeddingFromPooled(const Tensor& z) const;
  /// AM-softmax loss on (possibly soft) targets [B, L].
  Tensor LanguageLoss(const Tensor& embedding, const Tensor& targets, bool training,
                      Rng& rng) const;
  /// Cosine logits s * cos(theta) without margin, for scoring.
  Tensor LanguageLogits(const Tensor& embedding) const;

  /// One SE-Res2 block (ECAPA only), exposed for tests.
  Tensor SeRes2Block(size_t index, const Tensor& h, bool training) const;

  /// Eval-mode pooled vector and embedding of one feature matrix (T x F).
  std::vector<Real> PooledVector(const FeatureMatrix& f) const;
  std::vector<Real> Embed(const FeatureMatrix& f) const;
  /// Language log-posteriors of one feature matrix.
  std::vector<Real> LogPosteriors(const FeatureMatrix& f) const;

  /// Test hook: squeeze-excitation gates replaced by ones.
  bool force_unit_gates = false;

 private:
  struct SeRes2 {
    ConvLayer conv_in, conv_out;
    BatchNormLayer bn_in, bn_out;
    std::vector<ConvLayer> res2_convs;
    std::vector<BatchNormLayer> res2_bns;
    LinearLayer se_down, se_up;
  };

  Tensor EncodeEcapa(const Tensor& x, bool training) const;
  Tensor EncodeXvector(const Tensor& x, bool training) const;

  ModelConfig cfg_;
  ParamSet params_;
  // ECAPA
  ConvLayer stem_;
  BatchNormLayer stem_bn_;
  std::vector<SeRes2> blocks_;
  ConvLayer mfa_;
  ConvLayer att_hidden_, att_out_;
  BatchNormLayer pool_bn_;
  // x-vector
  std::vector<ConvLayer> tdnn_;
  std::vector<BatchNormLayer> tdnn_bn_;
  LinearLayer segment_;
  BatchNormLayer segment_bn_;
  // shared
  LinearLayer embedding_;
  Tensor classifier_;  // [L, E]
};

/// Feature matrix (T x F) as a [1, F, T] tensor; several equal-length
/// matrices stack to [B, F, T].
Tensor FeaturesToTensor(const std::vector<const FeatureMatrix*>& batch);

/// Pseudo-domain classifier on the pooled representation: the vector is
/// read as a one-channel sequence, then Conv1D, ReLU and two fully
/// connected layers.
class DomainHead {
 public:
  DomainHead(int64_t input_dim, int num_classes, uint64_t seed, int conv_channels = 4,
             int kernel = 5, int hidden = 64);
  Tensor operator()(const Tensor& z) const;
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  int64_t input_dim_;
  int conv_channels_;
  ParamSet params_;
  ConvLayer conv_;
  LinearLayer fc1_, fc2_;
};

}  // namespace lidwb::nn

#endif  // LIDWB_NN_MODELS_H_
