// src/harness/synth.cc

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

#include "lidwb/harness/synth.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "lidwb/augment.h"
#include "lidwb/dsp.h"
#include "lidwb/util/error.h"
#include "lidwb/util/parallel.h"
#include "lidwb/util/rng.h"

namespace lidwb::harness {
namespace {

constexpr int kRate = kCanonicalRateHz;
constexpr double kPi = std::numbers::pi;

// Time-varying two-pole resonator.
class Resonator {
 public:
  double Process(double x, double freq, double bw) {
    double r = std::exp(-kPi * bw / kRate);
    double c = 2.0 * r * std::cos(2.0 * kPi * freq / kRate);
    double y = (1.0 - r) * x + c * y1_ - r * r * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double y1_ = 0.0, y2_ = 0.0;
};

struct Speaker {
  double formant_scale;
  double f0_scale;
  double rate_scale;
  double breath;
};

Speaker MakeSpeaker(uint64_t seed) {
  Rng rng(seed);
  Speaker s;
  s.formant_scale = Uniform(rng, 0.92, 1.08);
  s.f0_scale = Uniform(rng, 0.8, 1.25);
  s.rate_scale = Uniform(rng, 0.9, 1.1);
  s.breath = Uniform(rng, 0.02, 0.08);
  return s;
}

int DrawIndex(const std::vector<double>& p, Rng& rng) {
  double u = Uniform(rng, 0.0, 1.0), acc = 0.0;
  for (size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(p.size()) - 1;
}

}  // namespace

CorpusStyle ParseCorpusStyle(const std::string& s) {
  if (s == "studio") return CorpusStyle::kStudio;
  if (s == "telephone") return CorpusStyle::kTelephone;
  if (s == "wild") return CorpusStyle::kWild;
  throw Error("unknown corpus style: " + s);
}

std::string CorpusStyleName(CorpusStyle s) {
  switch (s) {
    case CorpusStyle::kStudio: return "studio";
    case CorpusStyle::kTelephone: return "telephone";
    case CorpusStyle::kWild: return "wild";
  }
  return "?";
}

void SynthOptions::Validate() const {
  if (num_languages < 2) throw Error("synth_corpus: need at least two languages");
  if (speakers_per_language < 2) {
    throw Error("synth_corpus: need at least two speakers per language");
  }
  if (utts_per_speaker < 1) throw Error("synth_corpus: utts_per_speaker must be >= 1");
  if (!(utt_seconds >= 1.0)) throw Error("synth_corpus: utt_seconds must be >= 1");
}

std::vector<std::string> SynthLanguageNames(int n) {
  std::vector<std::string> out;
  for (int k = 0; k < n; ++k) out.push_back("lang" + std::to_string(k));
  return out;
}

LanguageRecipe MakeLanguageRecipe(const std::string& language) {
  Rng rng(MixSeed(HashString("recipe:" + language), 0x5eed));
  LanguageRecipe r;
  const int nv = 5;
  for (int v = 0; v < nv; ++v) {
    double f1 = Uniform(rng, 280.0, 820.0);
    double f2 = Uniform(rng, 900.0, 2400.0);
    double f3 = Uniform(rng, std::max(f2 + 300.0, 2300.0), 3400.0);
    r.vowels.push_back({f1, f2, f3});
  }
  for (int v = 0; v < nv; ++v) {
    std::vector<double> row(nv);
    double s = 0.0;
    for (double& x : row) {
      x = std::pow(Uniform(rng, 0.0, 1.0), 3.0) + 0.02;
      s += x;
    }
    for (double& x : row) x /= s;
    r.vowel_bigram.push_back(row);
  }
  for (int k = 0; k < 3; ++k) r.fricatives.push_back(Uniform(rng, 1200.0, 3700.0));
  r.f0_hz = Uniform(rng, 100.0, 210.0);
  r.f0_slope = Uniform(rng, -0.35, 0.35);
  r.syllable_rate = Uniform(rng, 3.0, 6.5);
  r.coda_prob = Uniform(rng, 0.0, 0.7);
  return r;
}

Waveform SynthesizeUtterance(const LanguageRecipe& recipe, uint64_t speaker_seed,
                             double seconds, uint64_t utt_seed) {
  const Speaker spk = MakeSpeaker(speaker_seed);
  Rng rng(utt_seed);
  const size_t total = static_cast<size_t>(seconds * kRate);
  Waveform w;
  w.samples.assign(total, 0.0);

  Resonator res[3];
  Resonator fric;
  double phase = 0.0, glottal_lp = 0.0;
  int vowel = UniformInt(rng, 0, static_cast<int>(recipe.vowels.size()) - 1);
  std::vector<double> prev = recipe.vowels[vowel];
  size_t n = static_cast<size_t>(Uniform(rng, 0.05, 0.2) * kRate);
  double phrase_start = static_cast<double>(n);
  double phrase_len = Uniform(rng, 1.2, 2.5) * kRate;

  while (n < total) {
    const double rate = recipe.syllable_rate * spk.rate_scale;
    const double syl = Uniform(rng, 0.75, 1.25) / rate;
    // consonant onset: band noise around a language fricative
    const double fc = recipe.fricatives[UniformInt(rng, 0, 2)] * spk.formant_scale;
    const size_t onset = static_cast<size_t>(syl * Uniform(rng, 0.2, 0.35) * kRate);
    const double onset_amp = Uniform(rng, 0.15, 0.4);
    for (size_t k = 0; k < onset && n < total; ++k, ++n) {
      double env = std::sin(kPi * static_cast<double>(k) / static_cast<double>(onset));
      w.samples[n] = onset_amp * env * fric.Process(Gaussian(rng), fc, 400.0) * 4.0;
    }
    // voiced nucleus with formant transition from the previous vowel
    vowel = DrawIndex(recipe.vowel_bigram[vowel], rng);
    const std::vector<double>& target = recipe.vowels[vowel];
    const size_t nucleus = static_cast<size_t>(syl * Uniform(rng, 0.45, 0.6) * kRate);
    for (size_t k = 0; k < nucleus && n < total; ++k, ++n) {
      double pos = static_cast<double>(k) / static_cast<double>(nucleus);
      double tr = std::min(1.0, pos / 0.3);
      double prog = std::clamp((static_cast<double>(n) - phrase_start) / phrase_len, 0.0, 1.0);
      double f0 = recipe.f0_hz * spk.f0_scale * (1.0 + recipe.f0_slope * (prog - 0.5)) *
                  (1.0 + 0.04 * std::sin(2 * kPi * 5.0 * n / kRate));
      phase += f0 / kRate;
      double pulse = 0.0;
      if (phase >= 1.0) {
        phase -= 1.0;
        pulse = 1.0;
      }
      glottal_lp = 0.9 * glottal_lp + pulse;
      double src = glottal_lp + spk.breath * Gaussian(rng);
      double y = 0.0;
      for (int f = 0; f < 3; ++f) {
        double fr = (prev[f] + tr * (target[f] - prev[f])) * spk.formant_scale;
        double bw = 60.0 + 0.06 * fr;
        y += res[f].Process(src, fr, bw) * (f == 0 ? 1.0 : f == 1 ? 0.7 : 0.4);
      }
      double env = std::min({1.0, pos / 0.1, (1.0 - pos) / 0.2});
      w.samples[n] = 6.0 * env * y;
    }
    prev = target;
    // optional coda, then a short gap; longer pause at phrase ends
    if (Uniform(rng, 0.0, 1.0) < recipe.coda_prob) {
      const size_t coda = static_cast<size_t>(syl * 0.15 * kRate);
      for (size_t k = 0; k < coda && n < total; ++k, ++n) {
        double env = 1.0 - static_cast<double>(k) / static_cast<double>(coda);
        w.samples[n] = 0.12 * env * fric.Process(Gaussian(rng), fc * 1.1, 600.0) * 4.0;
      }
    }
    n += static_cast<size_t>(syl * Uniform(rng, 0.05, 0.15) * kRate);
    if (static_cast<double>(n) - phrase_start > phrase_len) {
      n += static_cast<size_t>(Uniform(rng, 0.15, 0.35) * kRate);
      phrase_start = static_cast<double>(n);
      phrase_len = Uniform(rng, 1.2, 2.5) * kRate;
    }
  }
  double peak = 0.0;
  for (double x : w.samples) peak = std::max(peak, std::fabs(x));
  if (peak > 0.0) {
    for (double& x : w.samples) x *= 0.5 / peak;
  }
  return w;
}

Waveform ApplyCorpusStyle(const Waveform& w, CorpusStyle style, uint64_t seed) {
  Rng rng(seed);
  Waveform out;
  switch (style) {
    case CorpusStyle::kStudio:
      out = augment::AddNonSpeech(w, augment::NonSpeech::kNoise, 35.0, MixSeed(seed, 1));
      break;
    case CorpusStyle::kTelephone: {
      Waveform noisy = augment::AddNonSpeech(w, augment::NonSpeech::kNoise,
                                             Uniform(rng, 20.0, 30.0), MixSeed(seed, 1));
      std::vector<double> h = dsp::DesignBandpass(300.0, 3400.0, w.sample_rate_hz, 255);
      out = noisy;
      out.samples = dsp::FilterSame(noisy.samples, h);
      out = augment::CodecCompand(out, augment::Codec::kULaw);
      break;
    }
    case CorpusStyle::kWild: {
      out = w;
      if (Uniform(rng, 0.0, 1.0) < 0.6) {
        Rng ir_rng(MixSeed(seed, 2));
        std::vector<double> ir =
            augment::SynthesizeRir(Uniform(rng, 0.2, 0.6), w.sample_rate_hz, ir_rng);
        out = augment::ConvolveWithIr(out, ir);
      }
      auto kind = Uniform(rng, 0.0, 1.0) < 0.5 ? augment::NonSpeech::kNoise
                                                : augment::NonSpeech::kBabble;
      out = augment::AddNonSpeech(out, kind, Uniform(rng, 5.0, 20.0), MixSeed(seed, 3));
      double gain = std::pow(10.0, Uniform(rng, -6.0, 0.0) / 20.0);
      for (double& x : out.samples) x *= gain;
      break;
    }
  }
  ClipInPlace(&out);
  return out;
}

Manifest SynthCorpus(const SynthOptions& opts, const std::filesystem::path& out_dir) {
  opts.Validate();
  std::filesystem::create_directories(out_dir / "wav");
  const std::vector<std::string> langs = SynthLanguageNames(opts.num_languages);
  std::vector<LanguageRecipe> recipes;
  for (const auto& l : langs) recipes.push_back(MakeLanguageRecipe(l));

  Manifest m;
  m.base_dir = out_dir;
  for (int l = 0; l < opts.num_languages; ++l) {
    for (int s = 0; s < opts.speakers_per_language; ++s) {
      for (int u = 0; u < opts.utts_per_speaker; ++u) {
        UtteranceRecord r;
        r.speaker_id = opts.name + "-" + langs[l] + "-s" + std::to_string(s);
        r.utt_id = r.speaker_id + "-u" + std::to_string(u);
        r.corpus_id = opts.name;
        r.language = langs[l];
        r.path = "wav/" + r.utt_id + ".wav";
        m.rows.push_back(r);
      }
    }
  }
  ParallelFor(m.rows.size(), [&](size_t i) {
    const UtteranceRecord& r = m.rows[i];
    size_t l = static_cast<size_t>(std::find(langs.begin(), langs.end(), r.language) - langs.begin());
    uint64_t spk_seed = DeriveSeed(opts.seed, {opts.name, r.speaker_id});
    Waveform w = SynthesizeUtterance(recipes[l], spk_seed, opts.utt_seconds,
                                     DeriveSeed(opts.seed, {"utt", r.utt_id}));
    w = ApplyCorpusStyle(w, opts.style, DeriveSeed(opts.seed, {"style", r.utt_id}));
    WriteWav(out_dir / r.path, w);
  });
  WriteManifest(out_dir / "manifest.tsv", m);
  return m;
}

void AssignSplits(Manifest* m, double test_fraction, double val_fraction, uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0 || val_fraction <= 0.0 || val_fraction >= 1.0) {
    throw Error("split: fractions out of range");
  }
  std::map<std::pair<std::string, std::string>, std::set<std::string>> speakers;
  for (const auto& r : m->rows) speakers[{r.corpus_id, r.language}].insert(r.speaker_id);
  std::map<std::string, Split> assign;
  for (const auto& [key, set] : speakers) {
    std::vector<std::string> spk(set.begin(), set.end());
    if (spk.size() < 2) {
      throw Error("split: language " + key.second + " in " + key.first +
                  " has fewer than two speakers");
    }
    Rng rng(DeriveSeed(seed, {"split", key.first, key.second}));
    std::shuffle(spk.begin(), spk.end(), rng);
    size_t n_test = static_cast<size_t>(std::lround(test_fraction * static_cast<double>(spk.size())));
    size_t rest = spk.size() - n_test;
    if (rest < 2) throw Error("split: too few speakers left for train and val in " + key.first);
    size_t n_val = std::max<size_t>(1, std::lround(val_fraction * static_cast<double>(rest)));
    for (size_t k = 0; k < spk.size(); ++k) {
      assign[spk[k]] = k < n_test ? Split::kTest : k < n_test + n_val ? Split::kVal : Split::kTrain;
    }
  }
  for (auto& r : m->rows) r.split = assign.at(r.speaker_id);
}

}  // namespace lidwb::harness
