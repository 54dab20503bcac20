// src/augment/filters.cc

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
#include "lidwb/util/fft.h"

namespace lidwb::augment {
namespace {

double Peak(std::span<const double> x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::fabs(v));
  return p;
}

std::vector<double> Bandpassed(const std::vector<double>& x, double lo, double hi, int rate) {
  return dsp::FilterSame(x, dsp::DesignBandpass(lo, hi, rate, 255));
}

std::vector<double> SoftClip(std::vector<double> x, double drive) {
  double peak = Peak(x);
  if (peak <= 0.0) return x;
  for (double& v : x) v = std::tanh(drive * v / peak);
  return x;
}

// Simple feed-forward compressor on a smoothed envelope.
std::vector<double> Compress(std::vector<double> x, double ratio, int rate) {
  double peak = Peak(x);
  if (peak <= 0.0) return x;
  double attack = std::exp(-1.0 / (0.005 * rate));
  double release = std::exp(-1.0 / (0.1 * rate));
  double env = 0.0, threshold = 0.1 * peak;
  for (double& v : x) {
    double a = std::fabs(v);
    env = a > env ? attack * env + (1 - attack) * a : release * env + (1 - release) * a;
    if (env > threshold) v *= std::pow(env / threshold, 1.0 / ratio - 1.0);
  }
  return x;
}

}  // namespace

Band BandFor(BandMode mode, double drawn_cutoff_hz, int sample_rate) {
  double nyquist = sample_rate / 2.0;
  switch (mode) {
    case BandMode::kUpperCut: return {20.0, drawn_cutoff_hz};
    case BandMode::kLowerCut: return {drawn_cutoff_hz, nyquist};
    case BandMode::kTelephone: {
      double bin = sample_rate / 256.0;
      return {300.0, std::min(drawn_cutoff_hz, nyquist - bin)};
    }
  }
  throw Error("unknown band mode");
}

Waveform Bandlimit(const Waveform& w, BandMode mode, double drawn_cutoff_hz) {
  Band band = BandFor(mode, drawn_cutoff_hz, w.sample_rate_hz);
  if (!(band.low_hz < band.high_hz)) throw Error("bandlimit: empty pass band");
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples = dsp::FilterSame(
      w.samples, dsp::DesignBandpass(band.low_hz, band.high_hz, w.sample_rate_hz));
  ClipInPlace(&out);
  return out;
}

std::vector<double> SynthesizeRir(double rt60_s, int sample_rate, Rng& rng) {
  if (!(rt60_s > 0.0)) throw Error("RIR: RT60 must be positive");
  auto n = static_cast<size_t>(std::ceil(2.0 * rt60_s * sample_rate));
  // Amplitude falls by 60 dB (factor 1e-3) after rt60 seconds.
  double decay = std::log(1000.0) / (rt60_s * sample_rate);
  std::vector<double> h(n);
  for (size_t i = 0; i < n; ++i) h[i] = Gaussian(rng) * std::exp(-decay * i);
  h[0] = Peak(h) * 1.5;
  return h;
}

Waveform ConvolveWithIr(const Waveform& w, std::span<const double> ir) {
  if (ir.empty()) throw Error("convolve: empty impulse response");
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  if (w.empty()) return out;
  std::vector<double> full = FftConvolve(w.samples, ir);
  out.samples.assign(full.begin(), full.begin() + static_cast<long>(w.size()));
  double in_peak = Peak(w.samples), out_peak = Peak(out.samples);
  if (out_peak > 0.0) {
    for (double& v : out.samples) v *= in_peak / out_peak;
  }
  ClipInPlace(&out);
  return out;
}

Waveform ConvolveEnv(const Waveform& w, Environment env, uint64_t seed,
                     const std::vector<double>* external_ir) {
  Rng rng(seed);
  const int rate = w.sample_rate_hz;
  if (env == Environment::kRir) {
    if (external_ir != nullptr && !external_ir->empty()) return ConvolveWithIr(w, *external_ir);
    return ConvolveWithIr(w, SynthesizeRir(Uniform(rng, 0.2, 0.9), rate, rng));
  }
  if (w.empty()) return w;
  std::vector<double> x;
  double nyq = rate / 2.0;
  switch (env) {
    case Environment::kVinyl: {
      x = SoftClip(Bandpassed(w.samples, Uniform(rng, 60, 120), 0.9 * nyq, rate), 1.5);
      double peak = Peak(x);
      double crackle_rate = Uniform(rng, 5.0, 20.0) / rate;
      for (size_t i = 0; i < x.size(); ++i) {
        x[i] += 0.002 * peak * Gaussian(rng);
        if (Uniform(rng, 0.0, 1.0) < crackle_rate) x[i] += Uniform(rng, -0.3, 0.3) * peak;
      }
      break;
    }
    case Environment::kLiveHall: {
      std::vector<double> ir = SynthesizeRir(Uniform(rng, 1.2, 2.0), rate, rng);
      ir[0] *= 4.0;
      x = FftConvolve(w.samples, ir);
      x.resize(w.size());
      x = Compress(std::move(x), 2.0, rate);
      break;
    }
    case Environment::kSmartphone:
      x = SoftClip(Bandpassed(w.samples, Uniform(rng, 150, 300), 0.95 * nyq, rate),
                   Uniform(rng, 1.2, 2.5));
      break;
    case Environment::kRadio: {
      x = Compress(Bandpassed(w.samples, 300, std::min(3000.0, 0.9 * nyq), rate), 4.0, rate);
      double peak = Peak(x);
      for (double& v : x) v += 0.01 * peak * Gaussian(rng);
      break;
    }
    case Environment::kRir: break;
  }
  Waveform out;
  out.sample_rate_hz = rate;
  out.samples = std::move(x);
  double in_peak = Peak(w.samples), out_peak = Peak(out.samples);
  if (out_peak > 0.0) {
    for (double& v : out.samples) v *= in_peak / out_peak;
  }
  ClipInPlace(&out);
  return out;
}

}  // namespace lidwb::augment
