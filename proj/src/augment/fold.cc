// src/augment/fold.cc

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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lidwb/augment.h"
#include "lidwb/util/error.h"

namespace lidwb::augment {
namespace {

struct Version {
  int id;
  std::string sub;
};

std::vector<Version> AllVersions() {
  std::vector<Version> v;
  for (int k = 1; k <= kNumCategories; ++k) {
    for (const auto& s : SubCategories(k)) v.push_back({k, s});
  }
  return v;
}

UtteranceRecord MakeCopy(const UtteranceRecord& orig, const Version& v, int repeat) {
  UtteranceRecord r = orig;
  AugCategory c{v.id, v.sub};
  r.augment = c.Tag();
  r.pseudo_domain = v.id;
  r.source_utt = orig.utt_id;
  r.path.clear();
  r.utt_id = orig.utt_id + "+A" + std::to_string(v.id) + "-" + v.sub;
  if (repeat > 0) r.utt_id += "-r" + std::to_string(repeat);
  return r;
}

}  // namespace

FoldScenario ParseFoldScenario(const std::string& s) {
  if (s == "pooled") return FoldScenario::kPooled;
  if (s == "one-per-utterance") return FoldScenario::kOnePerUtterance;
  if (s == "half-content-triple") return FoldScenario::kHalfContentTriple;
  throw Error("unknown fold scenario: " + s);
}

std::string FoldScenarioName(FoldScenario s) {
  switch (s) {
    case FoldScenario::kPooled: return "pooled";
    case FoldScenario::kOnePerUtterance: return "one-per-utterance";
    case FoldScenario::kHalfContentTriple: return "half-content-triple";
  }
  return "?";
}

double FoldConfig::PerCategoryFraction(int category) const {
  return gamma / (kNumCategories * static_cast<double>(SubCategories(category).size()));
}

Manifest SampleFold(const Manifest& manifest, const FoldConfig& cfg, uint64_t seed) {
  if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma)) throw Error("fold factor must be >= 0");
  if (cfg.gamma == 0.0) return manifest;
  std::vector<size_t> originals;
  for (size_t i = 0; i < manifest.rows.size(); ++i) {
    if (manifest.rows[i].IsOriginal()) originals.push_back(i);
  }
  const size_t n_o = originals.size();
  Manifest out = manifest;
  if (n_o == 0) return out;
  Rng rng(seed);
  const std::vector<Version> versions = AllVersions();

  switch (cfg.scenario) {
    case FoldScenario::kPooled: {
      // Largest-remainder split of round(gamma * N_O) over the K categories,
      // each drawn from its own pool of S^k * N_O copies.
      auto total = static_cast<size_t>(std::llround(cfg.gamma * static_cast<double>(n_o)));
      double share = static_cast<double>(total) / kNumCategories;
      std::vector<size_t> count(kNumCategories + 1, 0);
      std::vector<std::pair<double, int>> remainders;
      size_t assigned = 0;
      for (int k = 1; k <= kNumCategories; ++k) {
        count[k] = static_cast<size_t>(std::floor(share));
        assigned += count[k];
        remainders.push_back({share - std::floor(share) + 1e-9 * Uniform(rng, 0, 1), k});
      }
      std::sort(remainders.rbegin(), remainders.rend());
      for (size_t i = 0; assigned < total; ++i, ++assigned) ++count[remainders[i].second];
      for (int k = 1; k <= kNumCategories; ++k) {
        const auto& subs = SubCategories(k);
        const size_t pool = subs.size() * n_o;
        std::vector<size_t> order(pool);
        std::vector<int> used(pool, 0);
        for (size_t drawn = 0; drawn < count[k];) {
          std::iota(order.begin(), order.end(), 0);
          std::shuffle(order.begin(), order.end(), rng);
          for (size_t j = 0; j < pool && drawn < count[k]; ++j, ++drawn) {
            size_t item = order[j];
            const auto& orig = manifest.rows[originals[item / subs.size()]];
            out.rows.push_back(MakeCopy(orig, {k, subs[item % subs.size()]}, used[item]++));
          }
        }
      }
      break;
    }
    case FoldScenario::kOnePerUtterance: {
      if (cfg.gamma > static_cast<double>(versions.size())) {
        throw Error("fold factor exceeds the " + std::to_string(versions.size()) +
                    " augmented versions available per utterance");
      }
      auto base = static_cast<size_t>(std::floor(cfg.gamma));
      auto extras = static_cast<size_t>(
          std::llround((cfg.gamma - static_cast<double>(base)) * static_cast<double>(n_o)));
      std::vector<size_t> who(n_o);
      std::iota(who.begin(), who.end(), 0);
      std::shuffle(who.begin(), who.end(), rng);
      std::vector<size_t> per_utt(n_o, base);
      for (size_t i = 0; i < extras; ++i) ++per_utt[who[i]];
      std::vector<size_t> order(versions.size());
      for (size_t u = 0; u < n_o; ++u) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (size_t j = 0; j < per_utt[u]; ++j) {
          out.rows.push_back(MakeCopy(manifest.rows[originals[u]], versions[order[j]], 0));
        }
      }
      break;
    }
    case FoldScenario::kHalfContentTriple: {
      auto copies = static_cast<size_t>(std::llround(2.0 * cfg.gamma));
      if (copies > static_cast<size_t>(kNumCategories)) {
        throw Error("fold factor needs more distinct categories than available");
      }
      std::vector<size_t> who(n_o);
      std::iota(who.begin(), who.end(), 0);
      std::shuffle(who.begin(), who.end(), rng);
      std::vector<int> cats(kNumCategories);
      for (size_t i = 0; i < n_o / 2; ++i) {
        std::iota(cats.begin(), cats.end(), 1);
        std::shuffle(cats.begin(), cats.end(), rng);
        for (size_t j = 0; j < copies; ++j) {
          const auto& subs = SubCategories(cats[j]);
          const std::string& sub = subs[UniformInt(rng, 0, static_cast<int>(subs.size()) - 1)];
          out.rows.push_back(MakeCopy(manifest.rows[originals[who[i]]], {cats[j], sub}, 0));
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace lidwb::augment
