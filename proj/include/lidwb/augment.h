// include/lidwb/augment.h

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

#ifndef LIDWB_AUGMENT_H_
#define LIDWB_AUGMENT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lidwb/audio_io.h"
#include "lidwb/manifest.h"
#include "lidwb/util/rng.h"

namespace lidwb::augment {

/// Number of signal-level augmentation categories A1..A7. A0 is the
/// untouched original.
inline constexpr int kNumCategories = 7;

/// Sub-category names of category `id` (empty for id 0).
const std::vector<std::string>& SubCategories(int id);
std::string CategoryName(int id);

struct AugCategory {
  int id = 0;
  std::string sub;

  /// "A3:telephone"; "A0" for the original.
  std::string Tag() const;
  static AugCategory Parse(const std::string& tag);
  /// Throws when the id/sub pair is not listed in the category table.
  void Validate() const;
};

/// External audio banks and encoder hooks. Everything defaults to the
/// internal generators.
struct AugmentOptions {
  double snr_min_db = 0.0;
  double snr_max_db = 20.0;
  /// Optional WAV banks per non-speech kind ("noise", "babble", "music") and "rir".
  std::map<std::string, std::vector<std::string>> banks;
  /// Shell command template with {in} and {out} placeholders, per lossy codec.
  std::map<std::string, std::string> lossy_encoders;
};

/// A fully resolved augmentation: every random choice is in `params`.
struct AugPlan {
  uint64_t seed = 0;
  AugCategory category;
  std::map<std::string, double> params;
};

/// Draws the random parameters of `category` from `seed`.
AugPlan DrawPlan(const AugCategory& category, uint64_t seed,
                 const AugmentOptions& opts = {});

/// Executes a plan. Pure function of (w, plan, opts); output clipped to [-1, 1].
Waveform ApplyPlan(const Waveform& w, const AugPlan& plan, const AugmentOptions& opts = {});

inline Waveform Augment(const Waveform& w, const AugCategory& c, uint64_t seed,
                        const AugmentOptions& opts = {}) {
  return ApplyPlan(w, DrawPlan(c, seed, opts), opts);
}

/// second(first(w)); parameters of each stage are drawn independently.
Waveform CascadeApply(const Waveform& w, const AugCategory& first, const AugCategory& second,
                      uint64_t seed, const AugmentOptions& opts = {});

// --- A1: additive non-speech --------------------------------------------

enum class NonSpeech { kNoise, kBabble, kMusic };

/// Internal generators, `n` samples at `rate`.
std::vector<double> GenerateNonSpeech(NonSpeech kind, size_t n, int rate, Rng& rng);

/// Adds noise so that speech power over active frames / noise power over
/// the same frames equals snr_db. Throws "silent input" for an all-zero w.
Waveform AddNonSpeech(const Waveform& w, NonSpeech kind, double snr_db, uint64_t seed,
                      const std::vector<double>* external_noise = nullptr);

// --- A2: signal parameter perturbation ----------------------------------

/// Semitones in [-4, 4]; length preserved.
Waveform PerturbPitch(const Waveform& w, double semitones);
/// Phase-vocoder pitch shift by an arbitrary frequency ratio, no range check.
Waveform PitchShiftByRatio(const Waveform& w, double ratio);
/// Gamma in [-15, 15] percent; output length round((100 - Gamma) / 100 * len).
Waveform PerturbSpeed(const Waveform& w, double gamma_percent);
/// Gain in [-30, 40] dB followed by clipping.
Waveform PerturbVolume(const Waveform& w, double gain_db);
/// Returns w[split:] ++ w[:split].
Waveform ShiftSwap(const Waveform& w, size_t split);

// --- A3: bandwidth -------------------------------------------------------

enum class BandMode { kUpperCut, kLowerCut, kTelephone };

struct Band {
  double low_hz = 0.0;
  double high_hz = 0.0;
};

/// Pass band for a mode given the drawn cutoff; telephone upper edges past
/// Nyquist are clamped one FFT bin below it.
Band BandFor(BandMode mode, double drawn_cutoff_hz, int sample_rate);
Waveform Bandlimit(const Waveform& w, BandMode mode, double drawn_cutoff_hz);

// --- A4: environment -----------------------------------------------------

enum class Environment { kRir, kVinyl, kLiveHall, kSmartphone, kRadio };

/// Exponentially decaying Gaussian noise with a direct-path impulse.
std::vector<double> SynthesizeRir(double rt60_s, int sample_rate, Rng& rng);
/// Convolution, truncated to the input length and peak-matched to the input.
Waveform ConvolveWithIr(const Waveform& w, std::span<const double> ir);
Waveform ConvolveEnv(const Waveform& w, Environment env, uint64_t seed,
                     const std::vector<double>* external_ir = nullptr);

// --- A5: speech enhancement ----------------------------------------------

enum class EnhanceMethod { kSpectralSubtraction, kMmse, kDereverb };

struct EnhanceOptions {
  double over_subtraction = 2.0;
  double spectral_floor = 0.01;
  double noise_frame_fraction = 0.1;
  /// Decision-directed smoothing of the a-priori SNR.
  double dd_alpha = 0.98;
  double dereverb_rt60_s = 0.5;
  double dereverb_delay_s = 0.05;
};

Waveform Enhance(const Waveform& w, EnhanceMethod method, const EnhanceOptions& opts = {});

// --- A6: waveform codecs -------------------------------------------------

enum class Codec { kALaw, kULaw, kImaAdpcm, kOkiAdpcm };

uint8_t LinearToALaw(int16_t pcm);
int16_t ALawToLinear(uint8_t code);
uint8_t LinearToULaw(int16_t pcm);
int16_t ULawToLinear(uint8_t code);
/// 4-bit IMA ADPCM codes, one per sample.
std::vector<uint8_t> ImaAdpcmEncode(std::span<const int16_t> pcm);
std::vector<int16_t> ImaAdpcmDecode(std::span<const uint8_t> codes);
/// Dialogic/OKI ADPCM: 12-bit core, 4-bit codes.
std::vector<uint8_t> OkiAdpcmEncode(std::span<const int16_t> pcm);
std::vector<int16_t> OkiAdpcmDecode(std::span<const uint8_t> codes);

/// Encode/decode round trip through `codec`.
Waveform CodecCompand(const Waveform& w, Codec codec);

// --- A7: lossy codecs ------------------------------------------------------

enum class LossyCodec { kAac, kGsm, kMp3, kOgg, kOpus, kWma };

struct LossySimOptions {
  bool quantize = true;
  bool limit_bandwidth = true;
};

/// Transform-coding simulation of a lossy codec: MDCT analysis, codec
/// bandwidth truncation, coarse per-band quantization, TDAC synthesis.
Waveform CodecLossySim(const Waveform& w, LossyCodec codec, uint64_t seed,
                       const LossySimOptions& sim = {});
/// Round trip through an external encoder command ({in}/{out} placeholders).
/// Throws when the command's executable cannot be found.
Waveform CodecLossyExternal(const Waveform& w, const std::string& command_template);

// --- fold-factor sampling --------------------------------------------------

enum class FoldScenario { kPooled, kOnePerUtterance, kHalfContentTriple };

FoldScenario ParseFoldScenario(const std::string& s);
std::string FoldScenarioName(FoldScenario s);

struct FoldConfig {
  double gamma = 0.0;
  FoldScenario scenario = FoldScenario::kPooled;

  /// eta^k = gamma / (K * S^k).
  double PerCategoryFraction(int category) const;
};

/// Originals of `manifest` plus sampled augmented copies (path empty, to be
/// generated). Non-original rows of the input are passed through unchanged.
Manifest SampleFold(const Manifest& manifest, const FoldConfig& cfg, uint64_t seed);

/// Seed for augmenting one utterance; independent of processing order.
uint64_t AugmentSeed(uint64_t experiment_seed, const std::string& utt_id,
                     const std::string& recipe);

/// Applies a recipe tag ("A3:telephone" or "A1:noise>A5:mmse").
Waveform ApplyRecipe(const Waveform& w, const std::string& recipe, uint64_t seed,
                     const AugmentOptions& opts = {});

}  // namespace lidwb::augment

#endif  // LIDWB_AUGMENT_H_
