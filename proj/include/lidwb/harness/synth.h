// include/lidwb/harness/synth.h

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

#ifndef LIDWB_HARNESS_SYNTH_H_
#define LIDWB_HARNESS_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lidwb/audio_io.h"
#include "lidwb/manifest.h"

namespace lidwb::harness {

enum class CorpusStyle { kStudio, kTelephone, kWild };

CorpusStyle ParseCorpusStyle(const std::string& s);
std::string CorpusStyleName(CorpusStyle s);

struct SynthOptions {
  std::string name = "synth";
  int num_languages = 5;
  int speakers_per_language = 6;
  int utts_per_speaker = 4;
  double utt_seconds = 6.5;
  CorpusStyle style = CorpusStyle::kStudio;
  uint64_t seed = 0;

  void Validate() const;
};

/// Language names shared by every synthetic corpus: "lang0", "lang1", ...
std::vector<std::string> SynthLanguageNames(int n);

/// Generative parameters of one synthetic language. Depends only on the
/// language name, so corpora built with different seeds share them.
struct LanguageRecipe {
  std::vector<std::vector<double>> vowels;    // [v] -> F1, F2, F3
  std::vector<std::vector<double>> vowel_bigram;  // row-stochastic
  std::vector<double> fricatives;             // centre frequencies (Hz)
  double f0_hz = 150.0;
  double f0_slope = 0.0;  // relative change across a phrase
  double syllable_rate = 4.5;
  double coda_prob = 0.3;
};

LanguageRecipe MakeLanguageRecipe(const std::string& language);

/// One utterance of `language` spoken by `speaker` (index within the
/// corpus), before corpus coloration.
Waveform SynthesizeUtterance(const LanguageRecipe& recipe, uint64_t speaker_seed,
                             double seconds, uint64_t utt_seed);

/// Corpus-level channel for `style`.
Waveform ApplyCorpusStyle(const Waveform& w, CorpusStyle style, uint64_t seed);

/// Writes WAVs under out_dir/wav and the manifest to out_dir/manifest.tsv.
/// Every row starts in the train split.
Manifest SynthCorpus(const SynthOptions& opts, const std::filesystem::path& out_dir);

/// Per corpus and language, shuffles speakers and assigns
/// round(test_fraction * n) to test, then round(val_fraction * rest) (at
/// least one) of the remaining to val; the rest train.
void AssignSplits(Manifest* m, double test_fraction, double val_fraction, uint64_t seed);

}  // namespace lidwb::harness

#endif  // LIDWB_HARNESS_SYNTH_H_
