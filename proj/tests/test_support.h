// tests/test_support.h

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

#ifndef LIDWB_TESTS_TEST_SUPPORT_H_
#define LIDWB_TESTS_TEST_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "lidwb/audio_io.h"

namespace lidwb::test {

inline Waveform Sine(double hz, double seconds, double amp = 0.5, int rate = 8000,
                     double phase = 0.0) {
  Waveform w;
  w.sample_rate_hz = rate;
  size_t n = static_cast<size_t>(std::llround(seconds * rate));
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    w.samples[i] = amp * std::sin(2.0 * std::numbers::pi * hz * i / rate + phase);
  }
  return w;
}

inline Waveform WhiteNoise(size_t n, double sd, uint64_t seed, int rate = 8000) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  Waveform w;
  w.sample_rate_hz = rate;
  w.samples.resize(n);
  for (double& x : w.samples) x = g(rng);
  return w;
}

// Naive DFT magnitude peak, in Hz. Independent of the FFT wrapper.
inline double DftPeakHz(const std::vector<double>& x, int rate) {
  const size_t n = x.size();
  double best = -1.0;
  size_t arg = 0;
  for (size_t k = 1; k < n / 2; ++k) {
    std::complex<double> acc = 0.0;
    const double w = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) acc += x[i] * std::polar(1.0, w * static_cast<double>(i));
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      arg = k;
    }
  }
  return static_cast<double>(arg) * rate / static_cast<double>(n);
}

inline double BinHz(size_t n, int rate) { return static_cast<double>(rate) / n; }

inline double Power(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

inline double RmsDb(const std::vector<double>& x) { return 10.0 * std::log10(Power(x)); }

// 10 log10(P(ref) / P(test - ref)).
inline double SnrDb(const std::vector<double>& ref, const std::vector<double>& test) {
  double ps = 0.0, pe = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    ps += ref[i] * ref[i];
    pe += (test[i] - ref[i]) * (test[i] - ref[i]);
  }
  return 10.0 * std::log10(ps / pe);
}

// Error power relative to signal power, in dB.
inline double RelErrorDb(const std::vector<double>& ref, const std::vector<double>& test) {
  return -SnrDb(ref, test);
}

inline double Peak(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

// Mean of per-frame SNRs (200-sample frames), each clamped to [-10, 35] dB.
inline double SegSnrDb(const std::vector<double>& ref, const std::vector<double>& test) {
  const size_t n = 200;
  double acc = 0.0;
  size_t frames = 0;
  for (size_t s = 0; s + n <= ref.size(); s += n) {
    double ps = 0.0, pe = 0.0;
    for (size_t i = s; i < s + n; ++i) {
      ps += ref[i] * ref[i];
      pe += (test[i] - ref[i]) * (test[i] - ref[i]);
    }
    acc += std::clamp(10.0 * std::log10((ps + 1e-20) / (pe + 1e-20)), -10.0, 35.0);
    ++frames;
  }
  return acc / static_cast<double>(frames);
}

inline std::filesystem::path TempDir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("lidwb_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace lidwb::test

#endif  // LIDWB_TESTS_TEST_SUPPORT_H_
