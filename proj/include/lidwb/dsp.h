// include/lidwb/dsp.h

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

#ifndef LIDWB_DSP_H_
#define LIDWB_DSP_H_

#include <cstddef>
#include <span>
#include <vector>

#include "lidwb/util/fft.h"

namespace lidwb::dsp {

std::vector<double> Hamming(size_t n, bool periodic = false);
std::vector<double> Hann(size_t n, bool periodic = false);

double MeanPower(std::span<const double> x);
double Rms(std::span<const double> x);
/// 10*log10(ratio) with the ratio floored at 1e-30.
double PowerDb(double ratio);

/// Linear-phase Kaiser windowed-sinc band-pass. f_low <= 0 gives a low-pass,
/// f_high >= rate/2 gives a high-pass, both gives a unit impulse.
std::vector<double> DesignBandpass(double f_low, double f_high, int sample_rate,
                                   size_t taps = 511, double beta = 8.0);

/// Applies an odd-length linear-phase FIR and removes its group delay, so the
/// output is time-aligned with and as long as the input.
std::vector<double> FilterSame(std::span<const double> x, std::span<const double> fir);

/// Weighted overlap-add short-time spectrum. Frames start at m * hop over the
/// signal padded by `frame` zeros on both sides.
struct Stft {
  size_t frame = 0;
  size_t hop = 0;
  size_t fft_size = 0;
  size_t signal_length = 0;
  std::vector<std::vector<Complex>> bins;  // [frame][fft_size/2 + 1]
};

Stft Analyze(std::span<const double> x, size_t frame, size_t hop, size_t fft_size,
             std::span<const double> window);
std::vector<double> Synthesize(const Stft& stft, std::span<const double> window);

/// Direct-form-I second-order section.
class Biquad {
 public:
  Biquad(double b0, double b1, double b2, double a1, double a2)
      : b0_(b0), b1_(b1), b2_(b2), a1_(a1), a2_(a2) {}
  /// Two-pole resonator with unity peak gain, centre `freq`, bandwidth `bw`.
  static Biquad Resonator(double freq, double bw, int sample_rate);
  double Process(double x);
  void Reset() { x1_ = x2_ = y1_ = y2_ = 0.0; }

 private:
  double b0_, b1_, b2_, a1_, a2_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

}  // namespace lidwb::dsp

#endif  // LIDWB_DSP_H_
