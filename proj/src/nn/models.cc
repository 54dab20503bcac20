// src/nn/models.cc

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

#include "lidwb/nn/models.h"

#include <cmath>

#include "lidwb/util/error.h"

namespace lidwb::nn {

ModelFamily ParseModelFamily(const std::string& s) {
  if (s == "ecapa") return ModelFamily::kEcapa;
  if (s == "xvector") return ModelFamily::kXvector;
  throw Error("unknown model family: " + s);
}

std::string ModelFamilyName(ModelFamily f) {
  return f == ModelFamily::kEcapa ? "ecapa" : "xvector";
}

ModelConfig ModelConfig::FullScale(ModelFamily family, int input_dim, int num_languages) {
  ModelConfig c;
  c.family = family;
  c.input_dim = input_dim;
  c.num_languages = num_languages;
  c.channels = 512;
  if (family == ModelFamily::kEcapa) {
    c.embedding_dim = 192;
    c.attention_dim = 128;
  } else {
    c.embedding_dim = 512;
    c.xvector_stats_dim = 1500;
    c.xvector_segment_dim = 512;
  }
  return c;
}

void ModelConfig::Validate() const {
  if (input_dim <= 0 || channels <= 0) throw Error("model: widths must be positive");
  if (embedding_dim <= 0) throw Error("model: embedding dimension must be positive");
  if (num_languages < 2) throw Error("model: need at least two languages");
  if (family == ModelFamily::kEcapa) {
    if (res2_scale < 2 || channels % res2_scale != 0) {
      throw Error("model: channels must split evenly into the Res2 scale");
    }
    if (dilations.empty()) throw Error("model: need at least one SE-Res2 block");
    if (channels / se_ratio < 1) throw Error("model: SE bottleneck is empty");
    if (first_kernel % 2 == 0) throw Error("model: first kernel must be odd");
  } else if (xvector_stats_dim <= 0 || xvector_segment_dim <= 0) {
    throw Error("model: x-vector widths must be positive");
  }
  if (!(am.scale > 0.0) || am.margin < 0.0 || am.margin >= 1.0) {
    throw Error("model: AM-softmax needs s > 0 and 0 <= m < 1");
  }
}

LidModel::LidModel(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
  cfg_.Validate();
  Rng rng(seed);
  const int64_t c = cfg_.channels;
  if (cfg_.family == ModelFamily::kEcapa) {
    stem_ = ConvLayer(&params_, "stem", cfg_.input_dim, c, cfg_.first_kernel, 1, rng);
    stem_bn_ = BatchNormLayer(&params_, "stem.bn", c);
    const int64_t width = c / cfg_.res2_scale;
    const int64_t squeeze = c / cfg_.se_ratio;
    for (size_t i = 0; i < cfg_.dilations.size(); ++i) {
      std::string p = "block" + std::to_string(i + 1);
      SeRes2 b;
      b.conv_in = ConvLayer(&params_, p + ".conv_in", c, c, 1, 1, rng);
      b.bn_in = BatchNormLayer(&params_, p + ".bn_in", c);
      for (int s = 1; s < cfg_.res2_scale; ++s) {
        std::string q = p + ".res2." + std::to_string(s);
        b.res2_convs.emplace_back(&params_, q, width, width, 3, cfg_.dilations[i], rng);
        b.res2_bns.emplace_back(&params_, q + ".bn", width);
      }
      b.conv_out = ConvLayer(&params_, p + ".conv_out", c, c, 1, 1, rng);
      b.bn_out = BatchNormLayer(&params_, p + ".bn_out", c);
      b.se_down = LinearLayer(&params_, p + ".se_down", c, squeeze, rng);
      b.se_up = LinearLayer(&params_, p + ".se_up", squeeze, c, rng);
      blocks_.push_back(std::move(b));
    }
    const int64_t agg = c * static_cast<int64_t>(cfg_.dilations.size());
    mfa_ = ConvLayer(&params_, "mfa", agg, agg, 1, 1, rng);
    att_hidden_ = ConvLayer(&params_, "attention.hidden", 3 * agg, cfg_.attention_dim, 1, 1, rng);
    att_out_ = ConvLayer(&params_, "attention.out", cfg_.attention_dim, agg, 1, 1, rng);
    pool_bn_ = BatchNormLayer(&params_, "pool.bn", 2 * agg);
  } else {
    const int kernels[] = {5, 3, 3, 1, 1};
    const int dils[] = {1, 2, 3, 1, 1};
    int64_t in = cfg_.input_dim;
    for (int i = 0; i < 5; ++i) {
      int64_t out = i == 4 ? cfg_.xvector_stats_dim : c;
      std::string p = "tdnn" + std::to_string(i + 1);
      tdnn_.emplace_back(&params_, p, in, out, kernels[i], dils[i], rng);
      tdnn_bn_.emplace_back(&params_, p + ".bn", out);
      in = out;
    }
    segment_ = LinearLayer(&params_, "segment1", 2 * in, cfg_.xvector_segment_dim, rng);
    segment_bn_ = BatchNormLayer(&params_, "segment1.bn", cfg_.xvector_segment_dim);
  }
  embedding_ = LinearLayer(&params_, "embedding", PooledDim(), cfg_.embedding_dim, rng);
  classifier_ = params_.AddUniform("classifier", {cfg_.num_languages, cfg_.embedding_dim},
                                   cfg_.embedding_dim, rng);
}

int64_t LidModel::PooledDim() const {
  if (cfg_.family == ModelFamily::kEcapa) {
    return 2 * static_cast<int64_t>(cfg_.channels) * static_cast<int64_t>(cfg_.dilations.size());
  }
  return cfg_.xvector_segment_dim;
}

Tensor LidModel::Encode(const Tensor& x, bool training) const {
  if (x.rank() != 3 || x.dim(1) != cfg_.input_dim) {
    throw Error("model: expected input [B, " + std::to_string(cfg_.input_dim) + ", T], got " +
                ShapeString(x.shape()));
  }
  return cfg_.family == ModelFamily::kEcapa ? EncodeEcapa(x, training)
                                            : EncodeXvector(x, training);
}

Tensor LidModel::SeRes2Block(size_t index, const Tensor& h, bool training) const {
  const SeRes2& b = blocks_.at(index);
  const int64_t width = cfg_.channels / cfg_.res2_scale;
  Tensor a = b.bn_in(Relu(b.conv_in(h)), training);
  std::vector<Tensor> ys;
  ys.push_back(SliceChannels(a, 0, width));
  for (int s = 1; s < cfg_.res2_scale; ++s) {
    Tensor part = SliceChannels(a, s * width, width);
    if (s > 1) part = Add(part, ys.back());
    ys.push_back(b.res2_bns[s - 1](Relu(b.res2_convs[s - 1](part)), training));
  }
  Tensor r = b.bn_out(Relu(b.conv_out(Concat(ys))), training);
  if (!force_unit_gates) {
    Tensor gate = Sigmoid(b.se_up(Relu(b.se_down(MeanTime(r)))));
    r = MulBroadcastTime(r, gate);
  }
  return Add(r, h);
}

Tensor LidModel::EncodeEcapa(const Tensor& x, bool training) const {
  Tensor h = stem_bn_(Relu(stem_(x)), training);
  std::vector<Tensor> outs;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    h = SeRes2Block(i, h, training);
    outs.push_back(h);
  }
  Tensor m = Relu(mfa_(Concat(outs)));
  const int64_t agg = m.dim(1), t = m.dim(2);
  // Attention sees each frame together with utterance-level mean and std.
  Tensor stats = MeanStdPool(m);
  Tensor context = Concat({m, BroadcastTime(SliceChannels(stats, 0, agg), t),
                           BroadcastTime(SliceChannels(stats, agg, agg), t)});
  Tensor alpha = Softmax(att_out_(Tanh(att_hidden_(context))));
  return pool_bn_(AttentiveStatPool(m, alpha), training);
}

Tensor LidModel::EncodeXvector(const Tensor& x, bool training) const {
  Tensor h = x;
  for (size_t i = 0; i < tdnn_.size(); ++i) h = tdnn_bn_[i](Relu(tdnn_[i](h)), training);
  return segment_bn_(Relu(segment_(MeanStdPool(h))), training);
}

Tensor LidModel::EmbeddingFromPooled(const Tensor& z) const { return embedding_(z); }

Tensor LidModel::LanguageLoss(const Tensor& embedding, const Tensor& targets, bool training,
                              Rng& rng) const {
  Tensor h = Dropout(Relu(embedding), cfg_.dropout, rng, training);
  return AmSoftmaxLoss(h, classifier_, targets, cfg_.am);
}

Tensor LidModel::LanguageLogits(const Tensor& embedding) const {
  return CosineLogits(Relu(embedding), classifier_, cfg_.am.scale);
}

Tensor FeaturesToTensor(const std::vector<const FeatureMatrix*>& batch) {
  if (batch.empty()) throw Error("empty feature batch");
  const int64_t t = batch[0]->frames(), f = batch[0]->dims();
  std::vector<Real> v(batch.size() * f * t);
  for (size_t b = 0; b < batch.size(); ++b) {
    if (batch[b]->frames() != t || batch[b]->dims() != f) {
      throw Error("feature batch with unequal shapes");
    }
    for (int64_t i = 0; i < t; ++i) {
      for (int64_t j = 0; j < f; ++j) v[(b * f + j) * t + i] = batch[b]->data(i, j);
    }
  }
  return Tensor::FromData({static_cast<int64_t>(batch.size()), f, t}, std::move(v));
}

std::vector<Real> LidModel::PooledVector(const FeatureMatrix& f) const {
  NoGradGuard guard;
  return Encode(FeaturesToTensor({&f}), false).values();
}

std::vector<Real> LidModel::Embed(const FeatureMatrix& f) const {
  NoGradGuard guard;
  return EmbeddingFromPooled(Encode(FeaturesToTensor({&f}), false)).values();
}

std::vector<Real> LidModel::LogPosteriors(const FeatureMatrix& f) const {
  NoGradGuard guard;
  Tensor emb = EmbeddingFromPooled(Encode(FeaturesToTensor({&f}), false));
  return LogSoftmax(LanguageLogits(emb)).values();
}

DomainHead::DomainHead(int64_t input_dim, int num_classes, uint64_t seed, int conv_channels,
                       int kernel, int hidden)
    : input_dim_(input_dim), conv_channels_(conv_channels) {
  Rng rng(seed);
  conv_ = ConvLayer(&params_, "conv", 1, conv_channels, kernel, 1, rng);
  fc1_ = LinearLayer(&params_, "fc1", conv_channels * input_dim, hidden, rng);
  fc2_ = LinearLayer(&params_, "fc2", hidden, num_classes, rng);
}

Tensor DomainHead::operator()(const Tensor& z) const {
  if (z.rank() != 2 || z.dim(1) != input_dim_) {
    throw Error("domain head: expected [B, " + std::to_string(input_dim_) + "], got " +
                ShapeString(z.shape()));
  }
  const int64_t b = z.dim(0);
  Tensor h = Relu(conv_(Reshape(z, {b, 1, input_dim_})));
  h = Relu(fc1_(Reshape(h, {b, conv_channels_ * input_dim_})));
  return fc2_(h);
}

}  // namespace lidwb::nn
