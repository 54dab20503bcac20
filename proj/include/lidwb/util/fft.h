// include/lidwb/util/fft.h

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

#ifndef LIDWB_UTIL_FFT_H_
#define LIDWB_UTIL_FFT_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace lidwb {

using Complex = std::complex<double>;

size_t NextPow2(size_t n);

/// Forward real FFT. `out` must hold in.size()/2 + 1 bins.
void RealFft(std::span<const double> in, std::span<Complex> out);

/// Inverse of RealFft, including the 1/n normalization. `out.size()` is n.
void InverseRealFft(std::span<const Complex> in, std::span<double> out);

/// Full linear convolution, length a.size() + b.size() - 1.
std::vector<double> FftConvolve(std::span<const double> a, std::span<const double> b);

/// Power spectrum |X(k)|^2 of a (zero-padded) frame.
std::vector<double> PowerSpectrum(std::span<const double> frame, size_t fft_size);

}  // namespace lidwb

#endif  // LIDWB_UTIL_FFT_H_
