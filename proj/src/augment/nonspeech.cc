// src/augment/nonspeech.cc

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

#include "lidwb/augment.h"
#include "lidwb/dsp.h"
#include "lidwb/util/error.h"

namespace lidwb::augment {
namespace {

std::vector<double> ShapedNoise(size_t n, Rng& rng) {
  // White Gaussian noise through a random one-pole tilt.
  double a = Uniform(rng, -0.5, 0.9);
  std::vector<double> out(n);
  double y = 0.0;
  for (size_t i = 0; i < n; ++i) {
    y = Gaussian(rng) + a * y;
    out[i] = y;
  }
  return out;
}

std::vector<double> Babble(size_t n, int rate, Rng& rng) {
  std::vector<double> out(n, 0.0);
  int talkers = UniformInt(rng, 4, 7);
  for (int t = 0; t < talkers; ++t) {
    double centre = Uniform(rng, 300.0, 2500.0);
    auto f1 = dsp::Biquad::Resonator(centre, Uniform(rng, 150.0, 400.0), rate);
    auto f2 = dsp::Biquad::Resonator(centre * Uniform(rng, 1.6, 2.6), 300.0, rate);
    double syll_rate = Uniform(rng, 3.0, 6.0);
    double phase = Uniform(rng, 0.0, 2.0 * M_PI);
    double gain = Uniform(rng, 0.5, 1.0);
    for (size_t i = 0; i < n; ++i) {
      double e = Gaussian(rng);
      double s = f1.Process(e) + 0.5 * f2.Process(e);
      double env = 0.5 * (1.0 + std::sin(2.0 * M_PI * syll_rate * i / rate + phase));
      out[i] += gain * env * env * s;
    }
  }
  return out;
}

std::vector<double> Music(size_t n, int rate, Rng& rng) {
  std::vector<double> out(n, 0.0);
  size_t pos = 0;
  while (pos < n) {
    auto len = static_cast<size_t>(Uniform(rng, 0.15, 0.5) * rate);
    double f0 = 110.0 * std::pow(2.0, UniformInt(rng, 0, 36) / 12.0);
    int harmonics = UniformInt(rng, 3, 6);
    double amp = Uniform(rng, 0.4, 1.0);
    for (size_t i = 0; i < len && pos + i < n; ++i) {
      double t = static_cast<double>(i) / rate;
      double env = std::min(1.0, t / 0.01) * std::exp(-3.0 * t);
      double v = 0.0;
      for (int h = 1; h <= harmonics; ++h) {
        double f = f0 * h;
        if (f >= rate / 2.0) break;
        v += std::sin(2.0 * M_PI * f * t) / h;
      }
      out[pos + i] += amp * env * v;
    }
    pos += len;
  }
  return out;
}

// Samples in frames within 40 dB of the loudest 25 ms frame.
std::vector<char> ActiveMask(const std::vector<double>& x, int rate) {
  size_t frame = std::max<size_t>(1, static_cast<size_t>(0.025 * rate));
  size_t frames = (x.size() + frame - 1) / frame;
  std::vector<double> energy(frames, 0.0);
  for (size_t i = 0; i < x.size(); ++i) energy[i / frame] += x[i] * x[i];
  double max_e = *std::max_element(energy.begin(), energy.end());
  std::vector<char> mask(x.size(), 0);
  if (max_e <= 0.0) return mask;
  for (size_t i = 0; i < x.size(); ++i) mask[i] = energy[i / frame] > max_e * 1e-4;
  return mask;
}

}  // namespace

std::vector<double> GenerateNonSpeech(NonSpeech kind, size_t n, int rate, Rng& rng) {
  switch (kind) {
    case NonSpeech::kNoise: return ShapedNoise(n, rng);
    case NonSpeech::kBabble: return Babble(n, rate, rng);
    case NonSpeech::kMusic: return Music(n, rate, rng);
  }
  throw Error("unknown non-speech kind");
}

Waveform AddNonSpeech(const Waveform& w, NonSpeech kind, double snr_db, uint64_t seed,
                      const std::vector<double>* external_noise) {
  if (w.empty()) throw Error("add_nonspeech: empty waveform");
  if (!std::isfinite(snr_db)) throw Error("add_nonspeech: SNR must be finite");
  std::vector<double> noise;
  if (external_noise != nullptr && !external_noise->empty()) {
    Rng rng(seed);
    size_t offset = static_cast<size_t>(UniformInt(
        rng, 0, static_cast<int>(std::min<size_t>(external_noise->size() - 1, 1u << 30))));
    noise.resize(w.size());
    for (size_t i = 0; i < w.size(); ++i) {
      noise[i] = (*external_noise)[(offset + i) % external_noise->size()];
    }
  } else {
    Rng rng(seed);
    noise = GenerateNonSpeech(kind, w.size(), w.sample_rate_hz, rng);
  }
  std::vector<char> mask = ActiveMask(w.samples, w.sample_rate_hz);
  double ps = 0.0, pn = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < w.size(); ++i) {
    if (!mask[i]) continue;
    ps += w.samples[i] * w.samples[i];
    pn += noise[i] * noise[i];
    ++count;
  }
  if (count == 0 || ps <= 0.0) throw Error("silent input");
  if (pn <= 0.0) throw Error("add_nonspeech: silent noise source");
  double gain = std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
  Waveform out = w;
  for (size_t i = 0; i < w.size(); ++i) out.samples[i] += gain * noise[i];
  ClipInPlace(&out);
  return out;
}

}  // namespace lidwb::augment
