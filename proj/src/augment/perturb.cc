// src/augment/perturb.cc

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

constexpr size_t kPvFrame = 256;
constexpr size_t kPvHop = kPvFrame / 4;

double PrincArg(double p) { return p - 2.0 * M_PI * std::round(p / (2.0 * M_PI)); }

// Phase-vocoder time stretch by `ratio` (> 1 makes the signal longer).
std::vector<double> TimeStretch(const std::vector<double>& x, double ratio) {
  const size_t n = x.size();
  const size_t bins = kPvFrame / 2 + 1;
  std::vector<double> window = dsp::Hann(kPvFrame, true);
  const double ha = static_cast<double>(kPvHop) / ratio;
  // Zero padding so that the first and last samples are fully overlapped.
  std::vector<double> padded(n + 2 * kPvFrame, 0.0);
  std::copy(x.begin(), x.end(), padded.begin() + kPvFrame);
  size_t frames = static_cast<size_t>(std::floor((padded.size() - kPvFrame) / ha)) + 1;
  size_t out_len = (frames - 1) * kPvHop + kPvFrame;
  std::vector<double> acc(out_len, 0.0), norm(out_len, 0.0);
  std::vector<double> prev_phase(bins, 0.0), syn_phase(bins, 0.0);
  std::vector<double> buf(kPvFrame), frame_out(kPvFrame);
  std::vector<Complex> spec(bins);
  long prev_pos = 0;
  for (size_t m = 0; m < frames; ++m) {
    long pos = std::lround(m * ha);
    if (pos + static_cast<long>(kPvFrame) > static_cast<long>(padded.size())) break;
    for (size_t i = 0; i < kPvFrame; ++i) buf[i] = padded[pos + i] * window[i];
    RealFft(buf, spec);
    double actual_hop = static_cast<double>(pos - prev_pos);
    for (size_t k = 0; k < bins; ++k) {
      double mag = std::abs(spec[k]);
      double phase = std::arg(spec[k]);
      if (m == 0 || actual_hop <= 0.0) {
        syn_phase[k] = phase;
      } else {
        double omega = 2.0 * M_PI * k / kPvFrame;
        double dev = PrincArg(phase - prev_phase[k] - omega * actual_hop);
        double inst = omega + dev / actual_hop;
        syn_phase[k] += inst * kPvHop;
      }
      prev_phase[k] = phase;
      spec[k] = std::polar(mag, syn_phase[k]);
    }
    prev_pos = pos;
    InverseRealFft(spec, frame_out);
    size_t start = m * kPvHop;
    for (size_t i = 0; i < kPvFrame; ++i) {
      acc[start + i] += frame_out[i] * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  auto pad_out = static_cast<size_t>(std::lround(kPvFrame * ratio));
  auto len = static_cast<size_t>(std::lround(n * ratio));
  std::vector<double> out(len, 0.0);
  for (size_t i = 0; i < len && i + pad_out < out_len; ++i) {
    double d = norm[i + pad_out];
    out[i] = d > 1e-8 ? acc[i + pad_out] / d : 0.0;
  }
  return out;
}

}  // namespace

Waveform PitchShiftByRatio(const Waveform& w, double ratio) {
  if (!(ratio > 0.0)) throw Error("pitch shift ratio must be positive");
  if (w.empty() || ratio == 1.0) return w;
  std::vector<double> stretched = TimeStretch(w.samples, ratio);
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples = ResampleBuffer(stretched, 1.0 / ratio, w.size());
  ClipInPlace(&out);
  return out;
}

Waveform PerturbPitch(const Waveform& w, double semitones) {
  if (!(semitones >= -4.0 && semitones <= 4.0)) {
    throw Error("perturb_pitch: semitones out of range [-4, 4]");
  }
  return PitchShiftByRatio(w, std::pow(2.0, semitones / 12.0));
}

Waveform PerturbSpeed(const Waveform& w, double gamma_percent) {
  if (!(gamma_percent >= -15.0 && gamma_percent <= 15.0)) {
    throw Error("perturb_speed: Gamma out of range [-15, 15]");
  }
  if (gamma_percent == 0.0) return w;
  double ratio = (100.0 - gamma_percent) / 100.0;
  auto len = static_cast<size_t>(std::llround(ratio * static_cast<double>(w.size())));
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples = ResampleBuffer(w.samples, ratio, len);
  ClipInPlace(&out);
  return out;
}

Waveform PerturbVolume(const Waveform& w, double gain_db) {
  if (!(gain_db >= -30.0 && gain_db <= 40.0)) {
    throw Error("perturb_volume: gain out of range [-30, 40] dB");
  }
  Waveform out = w;
  double g = std::pow(10.0, gain_db / 20.0);
  for (double& s : out.samples) s *= g;
  ClipInPlace(&out);
  return out;
}

Waveform ShiftSwap(const Waveform& w, size_t split) {
  if (split > w.size()) throw Error("shift_swap: split point past the end");
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples.reserve(w.size());
  out.samples.insert(out.samples.end(), w.samples.begin() + static_cast<long>(split),
                     w.samples.end());
  out.samples.insert(out.samples.end(), w.samples.begin(),
                     w.samples.begin() + static_cast<long>(split));
  return out;
}

}  // namespace lidwb::augment
