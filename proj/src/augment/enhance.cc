// src/augment/enhance.cc

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
#include "lidwb/dsp.h"
#include "lidwb/util/error.h"

namespace lidwb::augment {
namespace {

constexpr size_t kFrame = 200;  // 25 ms at 8 kHz
constexpr size_t kHop = 80;
constexpr size_t kFft = 256;
constexpr size_t kMedianWidth = 15;

std::vector<double> MedianSmooth(const std::vector<double>& x, size_t width) {
  std::vector<double> out(x.size()), tmp;
  size_t half = width / 2;
  for (size_t k = 0; k < x.size(); ++k) {
    size_t lo = k > half ? k - half : 0;
    size_t hi = std::min(x.size(), k + half + 1);
    tmp.assign(x.begin() + static_cast<long>(lo), x.begin() + static_cast<long>(hi));
    std::nth_element(tmp.begin(), tmp.begin() + static_cast<long>(tmp.size() / 2), tmp.end());
    out[k] = tmp[tmp.size() / 2];
  }
  return out;
}

// Mean power spectrum of the quietest frames that lie fully inside the signal.
std::vector<double> NoisePsd(const std::vector<std::vector<double>>& power,
                             const dsp::Stft& s, double fraction) {
  std::vector<size_t> inside;
  for (size_t m = 0; m < power.size(); ++m) {
    size_t start = m * s.hop;
    if (start >= s.frame && start + s.frame <= s.signal_length + s.frame) inside.push_back(m);
  }
  if (inside.empty()) {
    inside.resize(power.size());
    std::iota(inside.begin(), inside.end(), 0);
  }
  std::vector<double> energy(power.size(), 0.0);
  for (size_t m : inside) energy[m] = std::accumulate(power[m].begin(), power[m].end(), 0.0);
  std::stable_sort(inside.begin(), inside.end(),
                   [&](size_t a, size_t b) { return energy[a] < energy[b]; });
  size_t count = std::max<size_t>(1, static_cast<size_t>(fraction * inside.size()));
  std::vector<double> psd(power[0].size(), 0.0);
  for (size_t i = 0; i < count; ++i) {
    for (size_t k = 0; k < psd.size(); ++k) psd[k] += power[inside[i]][k];
  }
  for (double& v : psd) v /= static_cast<double>(count);
  return MedianSmooth(psd, kMedianWidth);
}

}  // namespace

Waveform Enhance(const Waveform& w, EnhanceMethod method, const EnhanceOptions& opts) {
  if (w.size() < kFrame) throw Error("enhance: input shorter than one frame");
  std::vector<double> window = dsp::Hamming(kFrame);
  dsp::Stft s = dsp::Analyze(w.samples, kFrame, kHop, kFft, window);
  std::vector<std::vector<double>> power(s.bins.size());
  for (size_t m = 0; m < s.bins.size(); ++m) {
    power[m].resize(s.bins[m].size());
    for (size_t k = 0; k < s.bins[m].size(); ++k) power[m][k] = std::norm(s.bins[m][k]);
  }
  const size_t bins = kFft / 2 + 1;
  std::vector<std::vector<double>> gain(power.size(), std::vector<double>(bins, 1.0));
  switch (method) {
    case EnhanceMethod::kSpectralSubtraction: {
      std::vector<double> noise = NoisePsd(power, s, opts.noise_frame_fraction);
      for (size_t m = 0; m < power.size(); ++m) {
        for (size_t k = 0; k < bins; ++k) {
          double y = power[m][k];
          double clean = std::max(y - opts.over_subtraction * noise[k],
                                  opts.spectral_floor * noise[k]);
          gain[m][k] = y > 0.0 ? std::sqrt(std::min(1.0, clean / y)) : 0.0;
        }
      }
      break;
    }
    case EnhanceMethod::kMmse: {
      std::vector<double> noise = NoisePsd(power, s, opts.noise_frame_fraction);
      std::vector<double> prev_clean(bins, 0.0);
      constexpr double kXiMin = 0.003;
      for (size_t m = 0; m < power.size(); ++m) {
        for (size_t k = 0; k < bins; ++k) {
          double y = power[m][k];
          if (noise[k] <= 0.0) {
            gain[m][k] = y > 0.0 ? 1.0 : 0.0;
            prev_clean[k] = y;
            continue;
          }
          double post = y / noise[k];
          double xi = opts.dd_alpha * prev_clean[k] / noise[k] +
                      (1.0 - opts.dd_alpha) * std::max(post - 1.0, 0.0);
          xi = std::max(xi, kXiMin);
          gain[m][k] = xi / (1.0 + xi);
          prev_clean[k] = gain[m][k] * gain[m][k] * y;
        }
      }
      break;
    }
    case EnhanceMethod::kDereverb: {
      // Late reverberation predicted from an earlier frame under an
      // exponential energy decay.
      double delta = 3.0 * std::log(10.0) / opts.dereverb_rt60_s;
      auto lag = static_cast<size_t>(
          std::max(1.0, std::round(opts.dereverb_delay_s * w.sample_rate_hz / kHop)));
      double scale = std::exp(-2.0 * delta * lag * kHop / w.sample_rate_hz);
      for (size_t m = lag; m < power.size(); ++m) {
        for (size_t k = 0; k < bins; ++k) {
          double y = power[m][k];
          double late = scale * power[m - lag][k];
          double clean = std::max(y - late, opts.spectral_floor * y);
          gain[m][k] = y > 0.0 ? std::sqrt(clean / y) : 0.0;
        }
      }
      break;
    }
  }
  for (size_t m = 0; m < s.bins.size(); ++m) {
    for (size_t k = 0; k < bins; ++k) s.bins[m][k] *= gain[m][k];
  }
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples = dsp::Synthesize(s, window);
  ClipInPlace(&out);
  return out;
}

}  // namespace lidwb::augment
