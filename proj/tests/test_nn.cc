// tests/test_nn.cc

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

#include <doctest.h>

#include "gradcheck.h"
#include "lidwb/features.h"
#include "lidwb/nn/checkpoint.h"
#include "lidwb/nn/layers.h"
#include "lidwb/nn/models.h"
#include "lidwb/nn/ops.h"
#include "lidwb/nn/train.h"
#include "lidwb/util/error.h"
#include "test_support.h"

using namespace lidwb;
using namespace lidwb::nn;

namespace {

Tensor Rand(const Shape& s, uint64_t seed, double lo = -1.0, double hi = 1.0,
            bool grad = true) {
  Rng rng(seed);
  std::vector<Real> v(NumElements(s));
  for (Real& x : v) x = Uniform(rng, lo, hi);
  return Tensor::FromData(s, std::move(v), grad);
}

// Values bounded away from zero, for ops with a kink there.
Tensor RandAwayFromZero(const Shape& s, uint64_t seed) {
  Rng rng(seed);
  std::vector<Real> v(NumElements(s));
  for (Real& x : v) x = (Uniform(rng, 0.05, 1.0)) * (UniformInt(rng, 0, 1) ? 1 : -1);
  return Tensor::FromData(s, std::move(v), true);
}

// Contract every output element with a fixed random weight.
Tensor Project(const Tensor& y, uint64_t seed = 99) {
  return Sum(Mul(y, Rand(y.shape(), seed, -1.0, 1.0, false)));
}

double Check(const std::function<Tensor()>& f, std::vector<Tensor> in, size_t coords = 64) {
  return test::GradCheck(f, std::move(in), coords).max_rel_error;
}

ModelConfig TinyEcapa() {
  ModelConfig c;
  c.family = ModelFamily::kEcapa;
  c.input_dim = 6;
  c.channels = 8;
  c.embedding_dim = 4;
  c.num_languages = 3;
  c.attention_dim = 4;
  c.dilations = {2, 3};
  c.se_ratio = 4;
  c.dropout = 0.0;
  return c;
}

ModelConfig TinyXvector() {
  ModelConfig c;
  c.family = ModelFamily::kXvector;
  c.input_dim = 6;
  c.channels = 8;
  c.xvector_stats_dim = 12;
  c.xvector_segment_dim = 6;
  c.embedding_dim = 4;
  c.num_languages = 3;
  c.dropout = 0.0;
  return c;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("backward basics") {
  Tensor x = Rand({5}, 1);
  Tensor s = Sum(x);
  s.Backward();
  for (Real g : x.grad()) CHECK(g == 1.0);
  Tensor y = Tensor::FromData({1}, {3.0}, true);
  Sum(Mul(y, y)).Backward();
  CHECK(y.grad()[0] == 6.0);
  Tensor v = Rand({3}, 2);
  CHECK_THROWS_AS(Mul(v, v).Backward(), Error);
  Tensor untracked = Rand({3}, 3, -1, 1, false);
  Sum(Mul(untracked, v)).Backward();
  CHECK_FALSE(untracked.has_grad());
}

TEST_CASE("elementwise gradients") {
  Tensor a = Rand({3, 4}, 1), b = Rand({3, 4}, 2);
  CHECK(Check([&] { return Project(Add(a, b)); }, {a, b}) < 1e-4);
  CHECK(Check([&] { return Project(Sub(a, b)); }, {a, b}) < 1e-4);
  CHECK(Check([&] { return Project(Mul(a, b)); }, {a, b}) < 1e-4);
  CHECK(Check([&] { return Project(Scale(a, -2.5)); }, {a}) < 1e-4);
  CHECK(Check([&] { return Project(AddScalar(a, 0.7)); }, {a}) < 1e-4);
  CHECK(Check([&] { return Project(Sigmoid(a)); }, {a}) < 1e-4);
  CHECK(Check([&] { return Project(Tanh(a)); }, {a}) < 1e-4);
  CHECK(Check([&] { return Mean(Mul(a, a)); }, {a}) < 1e-4);
  CHECK(Check([&] { return AddN({Project(a), Mean(Mul(b, b)), Project(a, 7)}); }, {a, b}) < 1e-4);
  CHECK(Check([&] { return Project(Reshape(a, {2, 6})); }, {a}) < 1e-4);
  Tensor r = RandAwayFromZero({3, 4}, 3);
  CHECK(Check([&] { return Project(Relu(r)); }, {r}) < 1e-4);
}

TEST_CASE("linear algebra gradients") {
  Tensor a = Rand({3, 5}, 1), b = Rand({5, 2}, 2);
  CHECK(Check([&] { return Project(MatMul(a, b)); }, {a, b}) < 1e-4);
  Tensor x = Rand({4, 5}, 3), w = Rand({3, 5}, 4), bias = Rand({3}, 5);
  CHECK(Check([&] { return Project(Linear(x, w, bias)); }, {x, w, bias}) < 1e-4);
  Tensor cx = Rand({2, 3, 11}, 6), cw = Rand({4, 3, 3}, 7), cb = Rand({4}, 8);
  for (int dil : {1, 2, 3}) {
    CHECK(Check([&] { return Project(Conv1d(cx, cw, cb, dil)); }, {cx, cw, cb}) < 1e-4);
  }
}

TEST_CASE("normalisation and pooling gradients") {
  Tensor x = Rand({4, 3, 6}, 1), g = Rand({3}, 2, 0.5, 1.5), b = Rand({3}, 3);
  std::vector<Real> rm(3, 0.0), rv(3, 1.0);
  CHECK(Check([&] { return Project(BatchNorm(x, g, b, true, &rm, &rv)); }, {x, g, b}) < 1e-4);
  CHECK(Check([&] { return Project(BatchNorm(x, g, b, false, &rm, &rv)); }, {x, g, b}) < 1e-4);
  Tensor x2 = Rand({5, 3}, 4);
  CHECK(Check([&] { return Project(BatchNorm(x2, g, b, true, &rm, &rv)); }, {x2, g, b}) < 1e-4);
  Tensor l = Rand({3, 5}, 5, -3, 3);
  CHECK(Check([&] { return Project(Softmax(l)); }, {l}) < 1e-4);
  CHECK(Check([&] { return Project(LogSoftmax(l)); }, {l}) < 1e-4);
  CHECK(Check([&] { return Project(MeanStdPool(x)); }, {x}) < 1e-4);
  Tensor logits = Rand({4, 3, 6}, 6);
  CHECK(Check([&] { return Project(AttentiveStatPool(x, Softmax(logits))); }, {x, logits}) <
        1e-4);
  CHECK(Check([&] { return Project(MeanTime(x)); }, {x}) < 1e-4);
  Tensor v = Rand({4, 3}, 7);
  CHECK(Check([&] { return Project(BroadcastTime(v, 5)); }, {v}) < 1e-4);
  CHECK(Check([&] { return Project(MulBroadcastTime(x, v)); }, {x, v}) < 1e-4);
  Tensor y = Rand({4, 2, 6}, 8);
  CHECK(Check([&] { return Project(Concat({x, y})); }, {x, y}) < 1e-4);
  CHECK(Check([&] { return Project(SliceChannels(x, 1, 2)); }, {x}) < 1e-4);
  CHECK(Check([&] { return Project(L2NormalizeRows(v)); }, {v}) < 1e-4);
  CHECK(Check([&] { return Project(GatherRows(v, {2, 0, 2})); }, {v}) < 1e-4);
}

TEST_CASE("loss gradients") {
  Tensor l = Rand({4, 3}, 1, -2, 2);
  Tensor soft = Tensor::FromData({4, 3}, {0.2, 0.8, 0, 0, 0, 1, 0.5, 0.25, 0.25, 1, 0, 0});
  CHECK(Check([&] { return SoftCrossEntropy(l, soft); }, {l}) < 1e-4);
  CHECK(Check([&] { return CrossEntropy(l, {0, 2, 1, 1}); }, {l}) < 1e-4);
  Tensor e = Rand({4, 5}, 2), w = Rand({3, 5}, 3);
  CHECK(Check([&] { return Project(CosineLogits(e, w, 30.0)); }, {e, w}) < 1e-4);
  Tensor t = OneHot({0, 2, 1, 1}, 3);
  CHECK(Check([&] { return AmSoftmaxLoss(e, w, t, {}); }, {e, w}) < 1e-4);
  Tensor d = Rand({4, 3}, 4);
  CHECK(Check(
            [&] {
              Rng rng(5);
              return Project(Dropout(d, 0.3, rng, true));
            },
            {d}) < 1e-4);
  Tensor a = Rand({5, 3}, 6), b = Rand({4, 3}, 7, 0.0, 2.0);
  CHECK(Check([&] { return MmdHat(a, b, 5); }, {a, b}) < 1e-4);
  CHECK(Check([&] { return Project(GradReverse(a, 0.7)); }, {a}) > 0.5);
}

TEST_CASE("grad reverse") {
  Tensor x = Rand({3, 4}, 1);
  Tensor y = GradReverse(x, 0.37);
  CHECK(y.values() == x.values());
  Sum(GradReverse(x, 1.0)).Backward();
  for (Real g : x.grad()) CHECK(g == -1.0);
  x.ZeroGrad();
  Sum(GradReverse(x, 0.0)).Backward();
  for (Real g : x.grad()) CHECK(g == 0.0);
  for (Real lam : {0.0, 0.3, 1.0, 2.5}) {
    Tensor a = Rand({3, 4}, 2), b = Rand({3, 4}, 2);
    Project(Tanh(a)).Backward();
    Project(Tanh(GradReverse(b, lam))).Backward();
    for (size_t i = 0; i < a.size(); ++i) CHECK(b.grad()[i] == -lam * a.grad()[i]);
  }
}

TEST_CASE("softmax and batchnorm statistics") {
  Tensor l = Rand({6, 7}, 3, -10, 10, false);
  Tensor p = Softmax(l);
  for (int i = 0; i < 6; ++i) {
    double s = 0.0;
    for (int j = 0; j < 7; ++j) s += p.data()[i * 7 + j];
    CHECK(std::fabs(s - 1.0) < 1e-6);
  }
  Tensor x = Rand({8, 3, 5}, 4, -3, 5, false);
  Tensor g = Tensor::Full({3}, 1.0), b = Tensor::Zeros({3});
  std::vector<Real> rm(3, 0.0), rv(3, 1.0);
  Tensor y = BatchNorm(x, g, b, true, &rm, &rv);
  for (int c = 0; c < 3; ++c) {
    double m = 0.0, v = 0.0;
    for (int n = 0; n < 8; ++n) {
      for (int t = 0; t < 5; ++t) m += y.data()[(n * 3 + c) * 5 + t];
    }
    m /= 40.0;
    for (int n = 0; n < 8; ++n) {
      for (int t = 0; t < 5; ++t) v += std::pow(y.data()[(n * 3 + c) * 5 + t] - m, 2);
    }
    v /= 40.0;
    CHECK(std::fabs(m) < 1e-4);
    CHECK(std::fabs(v - 1.0) < 1e-4);
  }
}

TEST_CASE("pooling identities") {
  Tensor x = Tensor::Full({2, 3, 9}, 0.75);
  Tensor p = MeanStdPool(x);
  for (int b = 0; b < 2; ++b) {
    for (int c = 0; c < 3; ++c) {
      CHECK(p.data()[b * 6 + c] == doctest::Approx(0.75));
      CHECK(p.data()[b * 6 + 3 + c] == doctest::Approx(1e-5).epsilon(1e-6));
    }
  }
  Tensor r = Rand({2, 3, 9}, 5, -1, 1, false);
  Tensor uniform = Tensor::Full({2, 3, 9}, 1.0 / 9.0);
  Tensor a = AttentiveStatPool(r, uniform), m = MeanStdPool(r);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a.data()[i] == doctest::Approx(m.data()[i]));
}

TEST_CASE("se gate forced to one") {
  ModelConfig c = TinyEcapa();
  LidModel model(c, 3);
  for (const auto& nt : model.params().params()) {
    if (nt.name == "block1.se_up.b") Tensor(nt.tensor).values().assign(nt.tensor.size(), 1000.0);
  }
  Tensor h = Rand({2, 8, 10}, 4, -1, 1, false);
  Tensor gated = model.SeRes2Block(0, h, false);
  model.force_unit_gates = true;
  Tensor plain = model.SeRes2Block(0, h, false);
  CHECK(gated.values() == plain.values());
  Tensor other = model.SeRes2Block(1, h, false);
  model.force_unit_gates = false;
  CHECK(model.SeRes2Block(1, h, false).values() != other.values());
}

TEST_CASE("am-softmax") {
  const int l = 4;
  Tensor w = Tensor::FromData({l, l}, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1});
  Tensor e = Tensor::FromData({1, l}, {0, 0, 2.5, 0});
  Tensor loss = AmSoftmaxLoss(e, w, OneHot({2}, l), {30.0, 0.2});
  CHECK(loss.item() == doctest::Approx(-std::log(std::exp(24.0) / (std::exp(24.0) + (l - 1)))));
  Tensor e2 = Rand({5, 6}, 1, -1, 1, false), w2 = Rand({3, 6}, 2, -1, 1, false);
  std::vector<int> y = {0, 1, 2, 2, 1};
  CHECK(AmSoftmaxLoss(e2, w2, OneHot(y, 3), {1.0, 0.0}).item() ==
        doctest::Approx(CrossEntropy(CosineLogits(e2, w2, 1.0), y).item()).epsilon(1e-12));
  double per = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    per += AmSoftmaxLoss(GatherRows(e2, {static_cast<int>(i)}), w2, OneHot({y[i]}, 3), {})
               .item();
  }
  CHECK(AmSoftmaxLoss(e2, w2, OneHot(y, 3), {}).item() ==
        doctest::Approx(per / y.size()).epsilon(1e-12));
  CHECK_THROWS_AS(OneHot({3}, 3), Error);
}

TEST_CASE("whole-model gradients") {
  for (const ModelConfig& c : {TinyEcapa(), TinyXvector()}) {
    LidModel model(c, 11);
    Tensor x = Rand({3, 6, 20}, 12);
    Tensor y = OneHot({0, 1, 2}, 3);
    auto loss = [&] {
      Rng rng(0);
      return model.LanguageLoss(model.EmbeddingFromPooled(model.Encode(x, true)), y, true, rng);
    };
    std::vector<Tensor> in = model.params().ParamTensors();
    in.push_back(x);
    // Logits scaled by s make the loss sharply curved; a finer step keeps the
    // central difference honest.
    auto r = test::GradCheck(loss, in, 24, 1, 1e-5, 1e-5, true);
    CHECK_MESSAGE(r.max_rel_error < 1e-4, ModelFamilyName(c.family));
    CHECK(r.skipped * 20 <= r.coords + r.skipped);
    // Inference path: running statistics, no kinks to dodge in practice.
    auto eval_loss = [&] {
      Rng rng(0);
      return model.LanguageLoss(model.EmbeddingFromPooled(model.Encode(x, false)), y, false, rng);
    };
    CHECK(test::GradCheck(eval_loss, in, 24, 1, 1e-5, 1e-5).max_rel_error < 1e-4);
  }
}

TEST_CASE("desk embedding contract") {
  ModelConfig c;
  c.num_languages = 5;
  LidModel model(c, 1);
  FeatureMatrix f = Mfcc(test::WhiteNoise(24000, 0.2, 1));
  REQUIRE(f.frames() == 298);
  std::vector<Real> e = model.Embed(f);
  CHECK(e.size() == 32);
  CHECK(model.Embed(f) == e);
  FeatureMatrix bad = f;
  bad.data = Matrix::Zero(298, 13);
  CHECK_THROWS_AS(model.Embed(bad), Error);
}

TEST_CASE("full-scale parameter counts") {
  const int64_t l = 14;
  auto conv = [](int64_t in, int64_t out, int64_t k) { return in * out * k + out; };
  auto lin = [](int64_t in, int64_t out) { return in * out + out; };
  auto bn = [](int64_t c) { return 2 * c; };
  int64_t ecapa = conv(20, 512, 5) + bn(512);
  for (int b = 0; b < 3; ++b) {
    ecapa += conv(512, 512, 1) + bn(512) + 3 * (conv(128, 128, 3) + bn(128)) +
             conv(512, 512, 1) + bn(512) + lin(512, 64) + lin(64, 512);
  }
  ecapa += conv(1536, 1536, 1) + conv(4608, 128, 1) + conv(128, 1536, 1) + bn(3072);
  ecapa += lin(3072, 192) + l * 192;
  LidModel e(ModelConfig::FullScale(ModelFamily::kEcapa, 20, l), 1);
  CHECK(static_cast<int64_t>(e.params().NumParameters()) == ecapa);

  int64_t xv = conv(20, 512, 5) + bn(512) + 2 * (conv(512, 512, 3) + bn(512)) +
               conv(512, 512, 1) + bn(512) + conv(512, 1500, 1) + bn(1500) +
               lin(3000, 512) + bn(512) + lin(512, 512) + l * 512;
  LidModel x(ModelConfig::FullScale(ModelFamily::kXvector, 20, l), 1);
  CHECK(static_cast<int64_t>(x.params().NumParameters()) == xv);
}

TEST_CASE("model config validation") {
  ModelConfig c;
  c.num_languages = 1;
  CHECK_THROWS_AS(c.Validate(), Error);
  c.num_languages = 3;
  c.embedding_dim = 0;
  CHECK_THROWS_AS(c.Validate(), Error);
  c.embedding_dim = 8;
  c.am.margin = 1.0;
  CHECK_THROWS_AS(c.Validate(), Error);
}

TEST_CASE("shuffled batches cover the data once") {
  Rng rng(3);
  auto b = ShuffledBatches(70, 32, rng);
  REQUIRE(b.size() == 3);
  std::vector<int> seen(70, 0);
  for (const auto& batch : b) {
    for (size_t i : batch) seen[i]++;
  }
  for (int s : seen) CHECK(s == 1);
  CHECK(ShuffledBatches(70, 32, rng, true).size() == 2);
}

namespace {

struct Blobs {
  Tensor x;
  std::vector<int> y;
};

Blobs MakeBlobs() {
  Rng rng(4);
  std::vector<Real> v;
  Blobs b;
  const double centres[3][2] = {{3, 0}, {-2, 2.5}, {-2, -2.5}};
  for (int i = 0; i < 60; ++i) {
    int k = i % 3;
    v.push_back(centres[k][0] + 0.3 * Gaussian(rng));
    v.push_back(centres[k][1] + 0.3 * Gaussian(rng));
    b.y.push_back(k);
  }
  b.x = Tensor::FromData({60, 2}, v);
  return b;
}

TrainHistory TrainBlobs(ParamSet* ps, const Blobs& d, TrainConfig cfg,
                        std::function<Real(int)> val = nullptr) {
  Rng init(1);
  LinearLayer layer(ps, "fc", 2, 4, init);
  Tensor w = ps->AddUniform("cls", {3, 4}, 4, init);
  TrainHooks hooks;
  hooks.make_batches = [&](int, Rng& rng) { return ShuffledBatches(60, 16, rng); };
  hooks.batch_loss = [&](const std::vector<size_t>& batch, int, Rng&) {
    std::vector<int> idx(batch.begin(), batch.end()), y;
    for (size_t i : batch) y.push_back(d.y[i]);
    return AmSoftmaxLoss(layer(GatherRows(d.x, idx)), w, OneHot(y, 3), {});
  };
  hooks.validation_loss = val ? val : [&](int) {
    std::vector<int> all(60);
    for (int i = 0; i < 60; ++i) all[i] = i;
    return AmSoftmaxLoss(layer(d.x), w, OneHot(d.y, 3), {}).item();
  };
  return Train(ps->ParamTensors(), {}, hooks, cfg);
}

}  // namespace

TEST_CASE("training on separable blobs") {
  Blobs d = MakeBlobs();
  ParamSet ps;
  TrainConfig cfg;
  cfg.max_epochs = 4;
  cfg.learning_rate = 0.01;
  TrainHistory h = TrainBlobs(&ps, d, cfg);
  REQUIRE(h.epochs.size() == 4);
  for (int i = 1; i < 4; ++i) CHECK(h.epochs[i].train_loss < h.epochs[i - 1].train_loss);
}

TEST_CASE("plateau and early stop") {
  Blobs d = MakeBlobs();
  ParamSet ps;
  TrainConfig cfg;
  cfg.max_epochs = 30;
  TrainHistory h = TrainBlobs(&ps, d, cfg, [](int) { return 1.0; });
  CHECK(h.early_stopped);
  CHECK(h.epochs.size() == 6);
  CHECK(h.lr_reductions >= 1);
  CHECK(h.best_epoch == 1);
}

TEST_CASE("plateau scheduler") {
  TrainConfig cfg;
  Tensor p = Tensor::Zeros({1}, true);
  AdamW opt({p}, cfg);
  PlateauScheduler s(0.5, 2, 1e-6);
  CHECK_FALSE(s.Observe(1.0, &opt));
  CHECK_FALSE(s.Observe(1.0, &opt));
  CHECK_FALSE(s.Observe(1.0, &opt));
  CHECK(s.Observe(1.0, &opt));
  CHECK(opt.learning_rate() == doctest::Approx(5e-4));
}

TEST_CASE("adamw decoupled decay") {
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.5;
  Tensor p = Tensor::FromData({1}, {2.0}, true);
  AdamW opt({p}, cfg);
  p.grad().assign(1, 0.0);
  opt.Step();
  // Zero gradient: only the decay term moves the weight.
  CHECK(p.values()[0] == doctest::Approx(2.0 * (1.0 - 0.1 * 0.5)));
}

TEST_CASE("training is deterministic") {
  Blobs d = MakeBlobs();
  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.seed = 9;
  ParamSet a, b;
  TrainBlobs(&a, d, cfg);
  TrainBlobs(&b, d, cfg);
  for (size_t i = 0; i < a.params().size(); ++i) {
    CHECK(a.params()[i].tensor.values() == b.params()[i].tensor.values());
  }
}

TEST_CASE("checkpoint round trip at float32") {
  LidModel m(TinyEcapa(), 5);
  auto path = test::TempDir("ckpt") / "m.ckpt";
  SaveCheckpoint(path, m.params(), {{"family", "ecapa"}, {"note", "x y"}});
  LidModel n(TinyEcapa(), 6);
  auto meta = LoadCheckpoint(path, &n.params());
  CHECK(meta.at("family") == "ecapa");
  CHECK(meta.at("note") == "x y");
  CHECK(ReadCheckpointMetadata(path) == meta);
  for (size_t i = 0; i < m.params().params().size(); ++i) {
    const auto& a = m.params().params()[i].tensor.values();
    const auto& b = n.params().params()[i].tensor.values();
    for (size_t k = 0; k < a.size(); ++k) CHECK(b[k] == static_cast<double>(static_cast<float>(a[k])));
  }
  LidModel other(TinyXvector(), 1);
  CHECK_THROWS_AS(LoadCheckpoint(path, &other.params()), Error);
}

}  // TEST_SUITE
