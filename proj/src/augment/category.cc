// src/augment/category.cc

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
#include <mutex>
#include <sstream>

#include "lidwb/augment.h"
#include "lidwb/util/error.h"

namespace lidwb::augment {
namespace {

const std::vector<std::vector<std::string>>& Table() {
  static const std::vector<std::vector<std::string>> table = {
      {},
      {"babble", "music", "noise"},
      {"pitch", "shift", "speed", "volume"},
      {"lower_cut", "upper_cut", "telephone"},
      {"smartphone", "live_hall", "radio", "vinyl", "rir"},
      {"spectral_subtraction", "mmse", "dereverb"},
      {"a_law", "ima_adpcm", "oki_adpcm", "u_law"},
      {"aac", "gsm", "mp3", "ogg", "opus", "wma"},
  };
  return table;
}

const char* kCategoryNames[] = {"original",    "non-speech", "perturbation", "bandwidth",
                                "environment", "enhancement", "waveform-codec", "lossy-codec"};

std::vector<double> LoadBankEntry(const std::string& path, int rate) {
  static std::mutex mu;
  static std::map<std::string, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(path);
  if (it != cache.end()) return it->second;
  Waveform w = Resample(ReadWav(path).at(0), rate);
  return cache.emplace(path, std::move(w.samples)).first->second;
}

const std::vector<std::string>* Bank(const AugmentOptions& opts, const std::string& kind) {
  auto it = opts.banks.find(kind);
  if (it == opts.banks.end() || it->second.empty()) return nullptr;
  return &it->second;
}

double Param(const AugPlan& plan, const std::string& key) {
  auto it = plan.params.find(key);
  if (it == plan.params.end()) {
    throw Error("augmentation plan " + plan.category.Tag() + " lacks parameter " + key);
  }
  return it->second;
}

uint64_t SubSeed(const AugPlan& plan, uint64_t k) { return MixSeed(plan.seed, k); }

}  // namespace

const std::vector<std::string>& SubCategories(int id) {
  if (id < 0 || id > kNumCategories) throw Error("category id out of range");
  return Table()[id];
}

std::string CategoryName(int id) {
  if (id < 0 || id > kNumCategories) throw Error("category id out of range");
  return kCategoryNames[id];
}

std::string AugCategory::Tag() const {
  if (id == 0) return "A0";
  return "A" + std::to_string(id) + ":" + sub;
}

AugCategory AugCategory::Parse(const std::string& tag) {
  if (tag.size() < 2 || tag[0] != 'A' || tag[1] < '0' || tag[1] > '9') {
    throw Error("bad augmentation tag: " + tag);
  }
  AugCategory c;
  size_t colon = tag.find(':');
  c.id = std::stoi(tag.substr(1, colon == std::string::npos ? std::string::npos : colon - 1));
  if (colon != std::string::npos) c.sub = tag.substr(colon + 1);
  c.Validate();
  return c;
}

void AugCategory::Validate() const {
  if (id < 0 || id > kNumCategories) throw Error("category id out of range: " + Tag());
  if (id == 0) {
    if (!sub.empty()) throw Error("original domain carries no sub-category");
    return;
  }
  const auto& subs = Table()[id];
  if (std::find(subs.begin(), subs.end(), sub) == subs.end()) {
    throw Error("unknown sub-category for A" + std::to_string(id) + ": '" + sub + "'");
  }
}

AugPlan DrawPlan(const AugCategory& category, uint64_t seed, const AugmentOptions& opts) {
  category.Validate();
  AugPlan plan;
  plan.seed = seed;
  plan.category = category;
  Rng rng(seed);
  auto& p = plan.params;
  const std::string& s = category.sub;
  switch (category.id) {
    case 0: break;
    case 1:
      p["snr_db"] = Uniform(rng, opts.snr_min_db, opts.snr_max_db);
      if (const auto* bank = Bank(opts, s)) {
        p["bank_index"] = UniformInt(rng, 0, static_cast<int>(bank->size()) - 1);
      }
      break;
    case 2:
      if (s == "pitch") p["semitones"] = Uniform(rng, -4.0, 4.0);
      if (s == "shift") p["split_fraction"] = Uniform(rng, 0.2, 0.8);
      if (s == "speed") p["gamma"] = Uniform(rng, -15.0, 15.0);
      if (s == "volume") p["gain_db"] = Uniform(rng, -30.0, 40.0);
      break;
    case 3:
      if (s == "upper_cut") p["cutoff_hz"] = Uniform(rng, 2500.0, 3500.0);
      if (s == "lower_cut") p["cutoff_hz"] = Uniform(rng, 50.0, 200.0);
      if (s == "telephone") p["cutoff_hz"] = Uniform(rng, 3000.0, 4000.0);
      break;
    case 4:
      if (s == "rir") {
        if (const auto* bank = Bank(opts, "rir")) {
          p["bank_index"] = UniformInt(rng, 0, static_cast<int>(bank->size()) - 1);
        } else {
          p["rt60_s"] = Uniform(rng, 0.2, 0.9);
        }
      }
      break;
    default: break;
  }
  return plan;
}

Waveform ApplyPlan(const Waveform& w, const AugPlan& plan, const AugmentOptions& opts) {
  const AugCategory& c = plan.category;
  c.Validate();
  const std::string& s = c.sub;
  Waveform out;
  switch (c.id) {
    case 0: out = w; break;
    case 1: {
      NonSpeech kind = s == "babble" ? NonSpeech::kBabble
                       : s == "music" ? NonSpeech::kMusic
                                      : NonSpeech::kNoise;
      std::vector<double> external;
      if (const auto* bank = Bank(opts, s)) {
        external = LoadBankEntry((*bank)[static_cast<size_t>(Param(plan, "bank_index"))],
                                 w.sample_rate_hz);
      }
      out = AddNonSpeech(w, kind, Param(plan, "snr_db"), SubSeed(plan, 1),
                         external.empty() ? nullptr : &external);
      break;
    }
    case 2:
      if (s == "pitch") out = PerturbPitch(w, Param(plan, "semitones"));
      if (s == "speed") out = PerturbSpeed(w, Param(plan, "gamma"));
      if (s == "volume") out = PerturbVolume(w, Param(plan, "gain_db"));
      if (s == "shift") {
        double f = Param(plan, "split_fraction");
        if (!(f >= 0.2 && f <= 0.8)) throw Error("shift_swap: split fraction out of range");
        out = ShiftSwap(w, static_cast<size_t>(std::llround(f * static_cast<double>(w.size()))));
      }
      break;
    case 3: {
      double f = Param(plan, "cutoff_hz");
      BandMode mode = s == "upper_cut"   ? BandMode::kUpperCut
                      : s == "lower_cut" ? BandMode::kLowerCut
                                         : BandMode::kTelephone;
      out = Bandlimit(w, mode, f);
      break;
    }
    case 4: {
      Environment env = s == "rir"          ? Environment::kRir
                        : s == "vinyl"      ? Environment::kVinyl
                        : s == "live_hall"  ? Environment::kLiveHall
                        : s == "smartphone" ? Environment::kSmartphone
                                            : Environment::kRadio;
      if (env == Environment::kRir) {
        if (const auto* bank = Bank(opts, "rir")) {
          std::vector<double> ir = LoadBankEntry(
              (*bank)[static_cast<size_t>(Param(plan, "bank_index"))], w.sample_rate_hz);
          out = ConvolveWithIr(w, ir);
        } else {
          Rng rng(SubSeed(plan, 4));
          out = ConvolveWithIr(w, SynthesizeRir(Param(plan, "rt60_s"), w.sample_rate_hz, rng));
        }
      } else {
        out = ConvolveEnv(w, env, SubSeed(plan, 4));
      }
      break;
    }
    case 5: {
      EnhanceMethod m = s == "mmse"       ? EnhanceMethod::kMmse
                        : s == "dereverb" ? EnhanceMethod::kDereverb
                                          : EnhanceMethod::kSpectralSubtraction;
      out = Enhance(w, m);
      break;
    }
    case 6: {
      Codec codec = s == "a_law"       ? Codec::kALaw
                    : s == "u_law"     ? Codec::kULaw
                    : s == "ima_adpcm" ? Codec::kImaAdpcm
                                       : Codec::kOkiAdpcm;
      out = CodecCompand(w, codec);
      break;
    }
    case 7: {
      auto it = opts.lossy_encoders.find(s);
      if (it != opts.lossy_encoders.end() && !it->second.empty()) {
        out = CodecLossyExternal(w, it->second);
        break;
      }
      LossyCodec codec = s == "aac"    ? LossyCodec::kAac
                         : s == "gsm"  ? LossyCodec::kGsm
                         : s == "mp3"  ? LossyCodec::kMp3
                         : s == "ogg"  ? LossyCodec::kOgg
                         : s == "opus" ? LossyCodec::kOpus
                                       : LossyCodec::kWma;
      out = CodecLossySim(w, codec, SubSeed(plan, 7));
      break;
    }
  }
  ClipInPlace(&out);
  return out;
}

Waveform CascadeApply(const Waveform& w, const AugCategory& first, const AugCategory& second,
                      uint64_t seed, const AugmentOptions& opts) {
  if (first.id == 0 || second.id == 0) throw Error("cascade: A0 cannot be cascaded");
  if (first.id == second.id) throw Error("cascade: identical categories");
  AugPlan p1 = DrawPlan(first, MixSeed(seed, 1), opts);
  AugPlan p2 = DrawPlan(second, MixSeed(seed, 2), opts);
  return ApplyPlan(ApplyPlan(w, p1, opts), p2, opts);
}

uint64_t AugmentSeed(uint64_t experiment_seed, const std::string& utt_id,
                     const std::string& recipe) {
  return DeriveSeed(experiment_seed, {"augment", utt_id, recipe});
}

Waveform ApplyRecipe(const Waveform& w, const std::string& recipe, uint64_t seed,
                     const AugmentOptions& opts) {
  if (recipe.empty() || recipe == "A0") return w;
  size_t gt = recipe.find('>');
  if (gt == std::string::npos) return Augment(w, AugCategory::Parse(recipe), seed, opts);
  return CascadeApply(w, AugCategory::Parse(recipe.substr(0, gt)),
                      AugCategory::Parse(recipe.substr(gt + 1)), seed, opts);
}

}  // namespace lidwb::augment
