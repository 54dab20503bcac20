// src/harness/pipeline.cc

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

#include "lidwb/harness/pipeline.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <unordered_map>

#include "lidwb/augment.h"
#include "lidwb/dg.h"
#include "lidwb/nn/checkpoint.h"
#include "lidwb/nn/ops.h"
#include "lidwb/util/error.h"
#include "lidwb/util/parallel.h"
#include "lidwb/util/rng.h"

namespace lidwb::harness {

using nn::Real;
using nn::Tensor;

Waveform LoadRowWaveform(const Manifest& m, const UtteranceRecord& row, uint64_t seed,
                         const augment::AugmentOptions& opts) {
  if (!row.path.empty()) {
    std::vector<Waveform> ch = ReadWav(m.ResolvePath(row));
    if (row.channel < 0 || row.channel >= static_cast<int>(ch.size())) {
      throw Error("channel " + std::to_string(row.channel) + " missing in " +
                  m.ResolvePath(row).string());
    }
    Waveform w = ch[row.channel];
    if (w.sample_rate_hz != kCanonicalRateHz) w = Resample(w, kCanonicalRateHz);
    // a stored file is already the final audio, augmented or not
    return w;
  }
  if (row.source_utt.empty()) throw Error("row " + row.utt_id + " has neither path nor source");
  const UtteranceRecord* src = nullptr;
  for (const auto& r : m.rows) {
    if (r.utt_id == row.source_utt) {
      src = &r;
      break;
    }
  }
  if (src == nullptr) throw Error("source utterance not found: " + row.source_utt);
  Waveform w = LoadRowWaveform(m, *src, seed, opts);
  return augment::ApplyRecipe(w, row.augment, augment::AugmentSeed(seed, row.utt_id, row.augment),
                              opts);
}

std::vector<size_t> SelectRows(const Manifest& m, const std::string& corpus, Split split,
                               bool originals_only) {
  std::vector<size_t> out;
  for (size_t i = 0; i < m.rows.size(); ++i) {
    const auto& r = m.rows[i];
    if (r.corpus_id == corpus && r.split == split && (!originals_only || r.IsOriginal())) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<Item> ExtractItems(const Manifest& m, const std::vector<size_t>& rows,
                               const std::vector<std::string>& languages,
                               const ExperimentConfig& cfg) {
  std::unordered_map<std::string, size_t> by_id;
  for (size_t i = 0; i < m.rows.size(); ++i) by_id.emplace(m.rows[i].utt_id, i);
  std::vector<std::vector<Item>> per_row(rows.size());
  ParallelFor(rows.size(), [&](size_t k) {
    const UtteranceRecord& r = m.rows[rows[k]];
    auto li = std::find(languages.begin(), languages.end(), r.language);
    if (li == languages.end()) throw Error("language outside the closed set: " + r.language);
    Waveform w;
    if (r.path.empty()) {
      auto it = by_id.find(r.source_utt);
      if (it == by_id.end()) throw Error("source utterance not found: " + r.source_utt);
      w = LoadRowWaveform(m, m.rows[it->second], cfg.seed, cfg.augment);
      w = augment::ApplyRecipe(w, r.augment, augment::AugmentSeed(cfg.seed, r.utt_id, r.augment),
                               cfg.augment);
    } else {
      w = LoadRowWaveform(m, r, cfg.seed, cfg.augment);
    }
    w = VadTrim(w);
    std::vector<Chunk> chunks = ChunkWaveform(w, cfg.chunk_seconds, r.utt_id);
    if (chunks.empty() && w.DurationSeconds() >= 1.0) chunks.push_back({r.utt_id, 0, w});
    for (const Chunk& c : chunks) {
      Item it;
      it.id = r.utt_id + "#" + std::to_string(c.index);
      it.corpus = r.corpus_id;
      it.language = static_cast<int>(li - languages.begin());
      it.domain = r.pseudo_domain ? *r.pseudo_domain : -1;
      it.feats = Mfcc(c.waveform, cfg.features);
      per_row[k].push_back(std::move(it));
    }
  });
  std::vector<Item> out;
  for (auto& v : per_row) {
    for (auto& it : v) out.push_back(std::move(it));
  }
  return out;
}

namespace {

std::vector<int> IndicesWhere(const std::vector<size_t>& batch, const std::vector<Item>& items,
                              const std::function<bool(const Item&)>& pred) {
  std::vector<int> out;
  for (size_t k = 0; k < batch.size(); ++k) {
    if (pred(items[batch[k]])) out.push_back(static_cast<int>(k));
  }
  return out;
}

// Batch tensors; equal-length chunks are grouped by the caller.
Tensor BatchFeatures(const std::vector<Item>& items, const std::vector<size_t>& batch) {
  std::vector<const FeatureMatrix*> ptr;
  for (size_t i : batch) ptr.push_back(&items[i].feats);
  return nn::FeaturesToTensor(ptr);
}

// Splits a batch so every piece has one frame count.
std::vector<std::vector<size_t>> ByLength(const std::vector<Item>& items,
                                          const std::vector<size_t>& batch) {
  std::map<Eigen::Index, std::vector<size_t>> g;
  for (size_t i : batch) g[items[i].feats.frames()].push_back(i);
  std::vector<std::vector<size_t>> out;
  for (auto& [t, v] : g) out.push_back(std::move(v));
  return out;
}

}  // namespace

TrainedModel TrainLidModel(const std::vector<Item>& train, const std::vector<Item>& val,
                           const std::vector<std::string>& languages,
                           const ExperimentConfig& cfg, uint64_t seed, std::ostream* log) {
  if (train.empty()) throw Error("train: no training chunks");
  if (val.empty()) throw Error("train: no validation chunks");
  const int nl = static_cast<int>(languages.size());
  const dg::DgMode mode = cfg.dg.mode;
  const Eigen::Index frames = train[0].feats.frames();
  for (const auto& it : train) {
    if (it.feats.frames() != frames) throw Error("train: chunks must share one length");
  }

  TrainedModel tm;
  tm.languages = languages;
  nn::ModelConfig mc = cfg.model;
  mc.num_languages = nl;
  mc.input_dim = cfg.features.num_ceps;
  tm.model = std::make_unique<nn::LidModel>(mc, MixSeed(seed, 1));
  nn::LidModel& model = *tm.model;
  std::vector<Tensor> params = model.params().ParamTensors();
  if (mode == dg::DgMode::kAdversarial || mode == dg::DgMode::kMultitask) {
    tm.head = std::make_unique<nn::DomainHead>(model.PooledDim(), dg::kNumPseudoDomains,
                                               MixSeed(seed, 2));
    for (const Tensor& p : tm.head->params().ParamTensors()) params.push_back(p);
  }
  std::map<int, Real> md_weights;
  if (mode == dg::DgMode::kMdMmd) {
    cfg.dg.Validate();
    for (int k = 1; k < dg::kNumPseudoDomains; ++k) md_weights[k] = cfg.dg.md_weights[k - 1];
  }

  std::vector<int> domains;
  for (const auto& it : train) domains.push_back(it.domain);
  const bool mmd = mode == dg::DgMode::kMmd || mode == dg::DgMode::kMdMmd;

  nn::TrainHooks hooks;
  hooks.make_batches = [&](int, Rng& rng) {
    if (mmd) return dg::StratifiedBatches(domains, cfg.train.batch_size, 4, rng);
    return nn::ShuffledBatches(train.size(), cfg.train.batch_size, rng);
  };
  hooks.batch_loss = [&](const std::vector<size_t>& batch, int epoch, Rng& rng) -> Tensor {
    const int64_t b = static_cast<int64_t>(batch.size());
    std::vector<FeatureMatrix> mixed;
    std::vector<const FeatureMatrix*> ptr;
    std::vector<Real> targets(b * nl, 0.0);
    if (cfg.spec_aug || cfg.mixup) mixed.reserve(batch.size());
    for (int64_t k = 0; k < b; ++k) {
      const Item& it = train[batch[k]];
      if (!cfg.spec_aug && !cfg.mixup) {
        ptr.push_back(&it.feats);
        targets[k * nl + it.language] = 1.0;
        continue;
      }
      FeatureMatrix f = it.feats;
      uint64_t s = DeriveSeed(seed, {"batch", it.id, std::to_string(epoch)});
      if (cfg.spec_aug) f = SpecAug(f, s);
      if (cfg.mixup) {
        const Item& other = train[batch[UniformInt(rng, 0, static_cast<int>(b) - 1)]];
        auto [mf, pair] = Mixup(f, it.language, other.feats, other.language, nl,
                                cfg.mixup_alpha, MixSeed(s, 7));
        f = std::move(mf);
        for (int l = 0; l < nl; ++l) targets[k * nl + l] = pair.soft_label[l];
      } else {
        targets[k * nl + it.language] = 1.0;
      }
      mixed.push_back(std::move(f));
      ptr.push_back(&mixed.back());
    }
    Tensor x = nn::FeaturesToTensor(ptr);
    Tensor z = model.Encode(x, true);
    Tensor e = model.EmbeddingFromPooled(z);
    Tensor y = Tensor::FromData({b, nl}, targets);
    Tensor lang = model.LanguageLoss(e, y, true, rng);
    const Real lambda = cfg.dg.lambda(epoch);
    switch (mode) {
      case dg::DgMode::kNone:
        return lang;
      case dg::DgMode::kAdversarial:
      case dg::DgMode::kMultitask: {
        std::vector<int> idx = IndicesWhere(batch, train, [](const Item& i) { return i.domain >= 0; });
        if (idx.empty()) return lang;
        std::vector<int> labels;
        for (int k : idx) labels.push_back(train[batch[k]].domain);
        Tensor logits = dg::DomainLogits(nn::GatherRows(z, idx), *tm.head, mode);
        Tensor dom = nn::CrossEntropy(logits, labels);
        return mode == dg::DgMode::kAdversarial ? dg::AdversarialLoss(lang, dom, lambda)
                                                : dg::MultitaskLoss(lang, dom, lambda);
      }
      case dg::DgMode::kMmd: {
        std::vector<int> src = IndicesWhere(batch, train, [](const Item& i) { return i.domain == 0; });
        std::vector<int> tgt = IndicesWhere(batch, train, [](const Item& i) { return i.domain > 0; });
        if (src.empty()) return lang;
        if (tgt.empty()) throw Error("empty target set");
        return dg::MmdTotalLoss(lang, nn::GatherRows(e, src), nn::GatherRows(e, tgt), lambda,
                                cfg.dg.num_kernels);
      }
      case dg::DgMode::kMdMmd: {
        std::vector<int> src = IndicesWhere(batch, train, [](const Item& i) { return i.domain == 0; });
        if (src.empty()) return lang;
        std::map<int, Tensor> per;
        for (int k = 1; k < dg::kNumPseudoDomains; ++k) {
          std::vector<int> idx =
              IndicesWhere(batch, train, [k](const Item& i) { return i.domain == k; });
          if (!idx.empty()) per.emplace(k, nn::GatherRows(e, idx));
        }
        return dg::MdMmdLoss(lang, nn::GatherRows(e, src), per, lambda, md_weights,
                             cfg.dg.num_kernels);
      }
    }
    return lang;
  };
  hooks.validation_loss = [&](int epoch) -> Real {
    Rng unused(0);
    Real total = 0.0;
    size_t count = 0;
    std::vector<size_t> all(val.size());
    for (size_t i = 0; i < val.size(); ++i) all[i] = i;
    for (const auto& group : ByLength(val, all)) {
      for (size_t s = 0; s < group.size(); s += 32) {
        std::vector<size_t> b(group.begin() + s,
                              group.begin() + std::min(group.size(), s + 32));
        std::vector<int> labels;
        for (size_t i : b) labels.push_back(val[i].language);
        Tensor e = model.EmbeddingFromPooled(model.Encode(BatchFeatures(val, b), false));
        Tensor loss = model.LanguageLoss(e, nn::OneHot(labels, nl), false, unused);
        total += loss.item() * static_cast<Real>(b.size());
        count += b.size();
      }
    }
    Real v = total / static_cast<Real>(count);
    if (log) *log << "  epoch " << epoch << " val_loss " << std::setprecision(5) << v << std::endl;
    return v;
  };
  nn::TrainConfig tc = cfg.train;
  tc.seed = MixSeed(seed, 3);
  tm.history = nn::Train(params, model.params().BufferTensors(), hooks, tc);
  return tm;
}

void SaveModel(const std::filesystem::path& path, const TrainedModel& m) {
  const nn::ModelConfig& c = m.model->config();
  std::map<std::string, std::string> meta;
  meta["family"] = nn::ModelFamilyName(c.family);
  meta["input_dim"] = std::to_string(c.input_dim);
  meta["channels"] = std::to_string(c.channels);
  meta["embedding_dim"] = std::to_string(c.embedding_dim);
  meta["xvector_stats_dim"] = std::to_string(c.xvector_stats_dim);
  meta["xvector_segment_dim"] = std::to_string(c.xvector_segment_dim);
  meta["first_kernel"] = std::to_string(c.first_kernel);
  meta["res2_scale"] = std::to_string(c.res2_scale);
  meta["se_ratio"] = std::to_string(c.se_ratio);
  meta["attention_dim"] = std::to_string(c.attention_dim);
  std::string dil;
  for (size_t k = 0; k < c.dilations.size(); ++k) dil += (k ? "," : "") + std::to_string(c.dilations[k]);
  meta["dilations"] = dil;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", c.am.scale);
  meta["am_scale"] = buf;
  std::snprintf(buf, sizeof(buf), "%.17g", c.am.margin);
  meta["am_margin"] = buf;
  std::snprintf(buf, sizeof(buf), "%.17g", c.dropout);
  meta["dropout"] = buf;
  std::string langs;
  for (size_t k = 0; k < m.languages.size(); ++k) langs += (k ? "," : "") + m.languages[k];
  meta["languages"] = langs;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  nn::SaveCheckpoint(path, m.model->params(), meta);
}

TrainedModel LoadModel(const std::filesystem::path& path) {
  auto meta = nn::ReadCheckpointMetadata(path);
  auto get = [&](const std::string& k) {
    auto it = meta.find(k);
    if (it == meta.end()) throw Error("checkpoint " + path.string() + " lacks '" + k + "'");
    return it->second;
  };
  TrainedModel m;
  std::string langs = get("languages");
  for (size_t s = 0; s <= langs.size();) {
    size_t e = langs.find(',', s);
    if (e == std::string::npos) e = langs.size();
    m.languages.push_back(langs.substr(s, e - s));
    s = e + 1;
  }
  nn::ModelConfig c;
  c.family = nn::ParseModelFamily(get("family"));
  c.input_dim = std::stoi(get("input_dim"));
  c.channels = std::stoi(get("channels"));
  c.embedding_dim = std::stoi(get("embedding_dim"));
  c.xvector_stats_dim = std::stoi(get("xvector_stats_dim"));
  c.xvector_segment_dim = std::stoi(get("xvector_segment_dim"));
  c.first_kernel = std::stoi(get("first_kernel"));
  c.res2_scale = std::stoi(get("res2_scale"));
  c.se_ratio = std::stoi(get("se_ratio"));
  c.attention_dim = std::stoi(get("attention_dim"));
  c.dilations.clear();
  std::string dil = get("dilations");
  for (size_t s = 0; s < dil.size();) {
    size_t e = dil.find(',', s);
    if (e == std::string::npos) e = dil.size();
    c.dilations.push_back(std::stoi(dil.substr(s, e - s)));
    s = e + 1;
  }
  c.am.scale = std::stod(get("am_scale"));
  c.am.margin = std::stod(get("am_margin"));
  c.dropout = std::stod(get("dropout"));
  c.num_languages = static_cast<int>(m.languages.size());
  m.model = std::make_unique<nn::LidModel>(c, 0);
  nn::LoadCheckpoint(path, &m.model->params());
  return m;
}

eval::ScoreSet ScoreItems(const nn::LidModel& model, const std::vector<Item>& items,
                          const std::vector<std::string>& languages) {
  std::vector<std::vector<Real>> post(items.size());
  ParallelFor(items.size(), [&](size_t i) { post[i] = model.LogPosteriors(items[i].feats); });
  eval::ScoreSet s;
  for (size_t i = 0; i < items.size(); ++i) {
    eval::AddPosteriorTrials(items[i].id, items[i].corpus, languages.at(items[i].language),
                             languages, post[i], &s);
  }
  return s;
}

std::vector<std::vector<double>> EmbedItems(const nn::LidModel& model,
                                            const std::vector<Item>& items, bool pooled) {
  std::vector<std::vector<double>> out(items.size());
  ParallelFor(items.size(), [&](size_t i) {
    out[i] = pooled ? model.PooledVector(items[i].feats) : model.Embed(items[i].feats);
  });
  return out;
}

Manifest BalancedDomainManifest(const Manifest& m, const std::vector<size_t>& rows,
                                uint64_t seed) {
  Manifest out;
  out.base_dir = m.base_dir;
  for (size_t i : rows) {
    const UtteranceRecord& orig = m.rows[i];
    if (!orig.IsOriginal()) continue;
    out.rows.push_back(orig);
    for (int k = 1; k < dg::kNumPseudoDomains; ++k) {
      const auto& subs = augment::SubCategories(k);
      Rng rng(DeriveSeed(seed, {"balanced", orig.utt_id, std::to_string(k)}));
      augment::AugCategory c{k, subs[UniformInt(rng, 0, static_cast<int>(subs.size()) - 1)]};
      UtteranceRecord r = orig;
      r.utt_id = orig.utt_id + "+A" + std::to_string(k) + "-" + c.sub;
      r.path.clear();
      r.source_utt = orig.utt_id;
      r.augment = c.Tag();
      r.pseudo_domain = k;
      out.rows.push_back(r);
    }
  }
  return out;
}

double DomainProbeAccuracy(const nn::LidModel& model, const std::vector<Item>& train,
                           const std::vector<Item>& test, bool pooled, uint64_t seed) {
  std::vector<int> ytr, yte;
  for (const auto& it : train) ytr.push_back(it.domain);
  for (const auto& it : test) yte.push_back(it.domain);
  return dg::LinearProbeAccuracy(EmbedItems(model, train, pooled), ytr,
                                 EmbedItems(model, test, pooled), yte, dg::kNumPseudoDomains,
                                 seed);
}

}  // namespace lidwb::harness
