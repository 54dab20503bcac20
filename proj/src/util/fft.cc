// src/util/fft.cc

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

#include "lidwb/util/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>

#include "lidwb/util/error.h"

namespace lidwb {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per size under a lock and shared read-only.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

std::mutex& PlanMutex() {
  static std::mutex m;
  return m;
}

const PlanPair& PlansFor(size_t n) {
  static std::map<size_t, PlanPair> cache;
  std::lock_guard<std::mutex> lock(PlanMutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  double* buf = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(n / 2 + 1);
  PlanPair p;
  // FFTW_ESTIMATE keeps plans (and therefore results) reproducible.
  p.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), buf, spec, FFTW_ESTIMATE);
  p.backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, buf, FFTW_ESTIMATE);
  fftw_free(buf);
  fftw_free(spec);
  return cache.emplace(n, p).first->second;
}

struct Buffers {
  size_t n = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  ~Buffers() {
    if (real) fftw_free(real);
    if (spec) fftw_free(spec);
  }
  void Resize(size_t size) {
    if (size == n) return;
    if (real) fftw_free(real);
    if (spec) fftw_free(spec);
    n = size;
    real = fftw_alloc_real(n);
    spec = fftw_alloc_complex(n / 2 + 1);
  }
};

Buffers& ThreadBuffers() {
  thread_local Buffers b;
  return b;
}

}  // namespace

size_t NextPow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void RealFft(std::span<const double> in, std::span<Complex> out) {
  size_t n = in.size();
  if (n == 0 || out.size() != n / 2 + 1) throw Error("RealFft: bad buffer sizes");
  const PlanPair& plans = PlansFor(n);
  Buffers& b = ThreadBuffers();
  b.Resize(n);
  std::copy(in.begin(), in.end(), b.real);
  fftw_execute_dft_r2c(plans.forward, b.real, b.spec);
  for (size_t k = 0; k < out.size(); ++k) out[k] = Complex(b.spec[k][0], b.spec[k][1]);
}

void InverseRealFft(std::span<const Complex> in, std::span<double> out) {
  size_t n = out.size();
  if (n == 0 || in.size() != n / 2 + 1) throw Error("InverseRealFft: bad buffer sizes");
  const PlanPair& plans = PlansFor(n);
  Buffers& b = ThreadBuffers();
  b.Resize(n);
  for (size_t k = 0; k < in.size(); ++k) {
    b.spec[k][0] = in[k].real();
    b.spec[k][1] = in[k].imag();
  }
  fftw_execute_dft_c2r(plans.backward, b.spec, b.real);
  double scale = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) out[i] = b.real[i] * scale;
}

std::vector<double> FftConvolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  size_t out_len = a.size() + b.size() - 1;
  size_t n = NextPow2(out_len);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<Complex> fa(n / 2 + 1), fb(n / 2 + 1);
  RealFft(pa, fa);
  RealFft(pb, fb);
  for (size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<double> full(n);
  InverseRealFft(fa, full);
  full.resize(out_len);
  return full;
}

std::vector<double> PowerSpectrum(std::span<const double> frame, size_t fft_size) {
  std::vector<double> buf(fft_size, 0.0);
  std::copy_n(frame.begin(), std::min(frame.size(), fft_size), buf.begin());
  std::vector<Complex> spec(fft_size / 2 + 1);
  RealFft(buf, spec);
  std::vector<double> power(spec.size());
  for (size_t k = 0; k < spec.size(); ++k) power[k] = std::norm(spec[k]);
  return power;
}

}  // namespace lidwb
