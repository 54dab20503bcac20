// src/dsp.cc

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

#include "lidwb/dsp.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lidwb/util/error.h"

namespace lidwb::dsp {
namespace {

double BesselI0(double x) {
  double sum = 1.0, term = 1.0, half = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half / k) * (half / k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

std::vector<double> Lowpass(double cutoff_hz, int rate, size_t taps, double beta) {
  std::vector<double> h(taps);
  double fc = cutoff_hz / rate;  // cycles per sample
  double mid = (static_cast<double>(taps) - 1.0) / 2.0;
  double norm = BesselI0(beta);
  for (size_t i = 0; i < taps; ++i) {
    double t = static_cast<double>(i) - mid;
    double sinc = t == 0.0 ? 2.0 * fc : std::sin(2.0 * M_PI * fc * t) / (M_PI * t);
    double r = t / mid;
    h[i] = sinc * BesselI0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
  }
  return h;
}

}  // namespace

std::vector<double> Hamming(size_t n, bool periodic) {
  std::vector<double> w(n);
  double denom = periodic ? static_cast<double>(n) : static_cast<double>(n) - 1.0;
  for (size_t i = 0; i < n; ++i) w[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / denom);
  if (n == 1) w[0] = 1.0;
  return w;
}

std::vector<double> Hann(size_t n, bool periodic) {
  std::vector<double> w(n);
  double denom = periodic ? static_cast<double>(n) : static_cast<double>(n) - 1.0;
  for (size_t i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / denom);
  if (n == 1) w[0] = 1.0;
  return w;
}

double MeanPower(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

double Rms(std::span<const double> x) { return std::sqrt(MeanPower(x)); }

double PowerDb(double ratio) { return 10.0 * std::log10(std::max(ratio, 1e-30)); }

std::vector<double> DesignBandpass(double f_low, double f_high, int sample_rate, size_t taps,
                                   double beta) {
  if (taps % 2 == 0) throw Error("DesignBandpass: tap count must be odd");
  double nyquist = sample_rate / 2.0;
  bool has_high_edge = f_high < nyquist;
  bool has_low_edge = f_low > 0.0;
  std::vector<double> h(taps, 0.0);
  h[taps / 2] = 1.0;
  if (has_high_edge) h = Lowpass(f_high, sample_rate, taps, beta);
  if (has_low_edge) {
    std::vector<double> lp = Lowpass(f_low, sample_rate, taps, beta);
    for (size_t i = 0; i < taps; ++i) h[i] -= lp[i];
  }
  return h;
}

std::vector<double> FilterSame(std::span<const double> x, std::span<const double> fir) {
  if (x.empty()) return {};
  std::vector<double> full = FftConvolve(x, fir);
  size_t delay = fir.size() / 2;
  return std::vector<double>(full.begin() + static_cast<long>(delay),
                             full.begin() + static_cast<long>(delay + x.size()));
}

Stft Analyze(std::span<const double> x, size_t frame, size_t hop, size_t fft_size,
             std::span<const double> window) {
  if (window.size() != frame || fft_size < frame || hop == 0) {
    throw Error("Analyze: inconsistent STFT geometry");
  }
  Stft s;
  s.frame = frame;
  s.hop = hop;
  s.fft_size = fft_size;
  s.signal_length = x.size();
  std::vector<double> padded(x.size() + 2 * frame, 0.0);
  std::copy(x.begin(), x.end(), padded.begin() + static_cast<long>(frame));
  std::vector<double> buf(fft_size);
  for (size_t start = 0; start + frame <= padded.size(); start += hop) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (size_t i = 0; i < frame; ++i) buf[i] = padded[start + i] * window[i];
    std::vector<Complex> spec(fft_size / 2 + 1);
    RealFft(buf, spec);
    s.bins.push_back(std::move(spec));
  }
  return s;
}

std::vector<double> Synthesize(const Stft& s, std::span<const double> window) {
  size_t padded_len = s.signal_length + 2 * s.frame;
  std::vector<double> acc(padded_len, 0.0), norm(padded_len, 0.0);
  std::vector<double> buf(s.fft_size);
  for (size_t m = 0; m < s.bins.size(); ++m) {
    InverseRealFft(s.bins[m], buf);
    size_t start = m * s.hop;
    for (size_t i = 0; i < s.frame && start + i < padded_len; ++i) {
      acc[start + i] += buf[i] * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  std::vector<double> out(s.signal_length);
  for (size_t i = 0; i < s.signal_length; ++i) {
    double d = norm[i + s.frame];
    out[i] = d > 1e-12 ? acc[i + s.frame] / d : 0.0;
  }
  return out;
}

Biquad Biquad::Resonator(double freq, double bw, int sample_rate) {
  double r = std::exp(-M_PI * bw / sample_rate);
  double theta = 2.0 * M_PI * freq / sample_rate;
  double a1 = -2.0 * r * std::cos(theta);
  double a2 = r * r;
  // Normalise so that |H| = 1 at the centre frequency.
  std::complex<double> z = std::polar(1.0, theta);
  std::complex<double> den = 1.0 + a1 / z + a2 / (z * z);
  double g = std::abs(den);
  return Biquad(g, 0.0, 0.0, a1, a2);
}

double Biquad::Process(double x) {
  double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
  x2_ = x1_;
  x1_ = x;
  y2_ = y1_;
  y1_ = y;
  return y;
}

}  // namespace lidwb::dsp
