// src/augment/lossy.cc

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

#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <sstream>

#include "lidwb/augment.h"
#include "lidwb/util/error.h"

namespace lidwb::augment {
namespace {

struct LossyProfile {
  size_t hop;           // MDCT coefficients per frame
  double cutoff_lo_hz;  // bandwidth drawn uniformly from [lo, hi]
  double cutoff_hi_hz;
  int bits_lo;  // quantizer resolution per band
  int bits_hi;
};

LossyProfile ProfileFor(LossyCodec codec) {
  switch (codec) {
    case LossyCodec::kAac: return {256, 3000, 3800, 4, 6};
    case LossyCodec::kGsm: return {160, 3300, 3300, 3, 4};
    case LossyCodec::kMp3: return {192, 2800, 3600, 3, 5};
    case LossyCodec::kOgg: return {256, 3200, 3900, 4, 6};
    case LossyCodec::kOpus: return {160, 3400, 4000, 4, 6};
    case LossyCodec::kWma: return {256, 2600, 3400, 3, 5};
  }
  throw Error("unknown lossy codec");
}

constexpr size_t kBandWidth = 16;
constexpr double kBandZeroRatio = 1e-3;

// cos((pi / N)(n + 1/2 + N/2)(k + 1/2)), N = hop, n < 2N, k < N.
const std::vector<double>& MdctBasis(size_t hop) {
  static std::mutex mu;
  static std::map<size_t, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(hop);
  if (it != cache.end()) return it->second;
  std::vector<double> basis(2 * hop * hop);
  double n0 = 0.5 + hop / 2.0;
  for (size_t k = 0; k < hop; ++k) {
    for (size_t n = 0; n < 2 * hop; ++n) {
      basis[k * 2 * hop + n] = std::cos(M_PI / hop * (n + n0) * (k + 0.5));
    }
  }
  return cache.emplace(hop, std::move(basis)).first->second;
}

bool CommandAvailable(const std::string& command) {
  std::istringstream is(command);
  std::string exe;
  is >> exe;
  if (exe.empty()) return false;
  if (exe.find('/') != std::string::npos) return access(exe.c_str(), X_OK) == 0;
  const char* path = std::getenv("PATH");
  if (path == nullptr) return false;
  std::istringstream dirs(path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    std::string candidate = (dir.empty() ? "." : dir) + "/" + exe;
    struct stat st;
    if (stat(candidate.c_str(), &st) == 0 && S_ISREG(st.st_mode) &&
        access(candidate.c_str(), X_OK) == 0) {
      return true;
    }
  }
  return false;
}

void ReplaceAll(std::string* s, const std::string& from, const std::string& to) {
  for (size_t pos = 0; (pos = s->find(from, pos)) != std::string::npos; pos += to.size()) {
    s->replace(pos, from.size(), to);
  }
}

}  // namespace

Waveform CodecLossySim(const Waveform& w, LossyCodec codec, uint64_t seed,
                       const LossySimOptions& sim) {
  LossyProfile prof = ProfileFor(codec);
  Rng rng(seed);
  double cutoff = Uniform(rng, prof.cutoff_lo_hz, prof.cutoff_hi_hz);
  int bits = UniformInt(rng, prof.bits_lo, prof.bits_hi);
  const size_t N = prof.hop;
  const std::vector<double>& basis = MdctBasis(N);
  std::vector<double> window(2 * N);
  for (size_t n = 0; n < 2 * N; ++n) window[n] = std::sin(M_PI * (n + 0.5) / (2.0 * N));

  const size_t frames = (w.size() + N - 1) / N + 1;
  std::vector<double> padded((frames + 1) * N, 0.0);
  std::copy(w.samples.begin(), w.samples.end(), padded.begin() + static_cast<long>(N));
  std::vector<double> out(padded.size(), 0.0);

  const double bin_hz = w.sample_rate_hz / (2.0 * N);
  size_t keep = N;
  if (sim.limit_bandwidth) {
    keep = std::min(N, static_cast<size_t>(std::floor(cutoff / bin_hz)));
  }
  const double levels = std::ldexp(1.0, bits - 1) - 1.0;
  std::vector<double> xw(2 * N), coef(N);
  for (size_t f = 0; f < frames; ++f) {
    const double* seg = padded.data() + f * N;
    for (size_t n = 0; n < 2 * N; ++n) xw[n] = seg[n] * window[n];
    for (size_t k = 0; k < N; ++k) {
      const double* b = basis.data() + k * 2 * N;
      double acc = 0.0;
      for (size_t n = 0; n < 2 * N; ++n) acc += xw[n] * b[n];
      coef[k] = k < keep ? acc : 0.0;
    }
    if (sim.quantize) {
      double frame_max = 0.0;
      std::vector<double> band_energy((N + kBandWidth - 1) / kBandWidth, 0.0);
      for (size_t k = 0; k < N; ++k) band_energy[k / kBandWidth] += coef[k] * coef[k];
      for (double e : band_energy) frame_max = std::max(frame_max, e);
      for (size_t b = 0; b < band_energy.size(); ++b) {
        size_t lo = b * kBandWidth, hi = std::min(N, lo + kBandWidth);
        if (band_energy[b] <= kBandZeroRatio * frame_max) {
          std::fill(coef.begin() + static_cast<long>(lo), coef.begin() + static_cast<long>(hi),
                    0.0);
          continue;
        }
        double scale = 0.0;
        for (size_t k = lo; k < hi; ++k) scale = std::max(scale, std::fabs(coef[k]));
        for (size_t k = lo; k < hi; ++k) {
          coef[k] = std::round(coef[k] / scale * levels) / levels * scale;
        }
      }
    }
    for (size_t n = 0; n < 2 * N; ++n) {
      double acc = 0.0;
      for (size_t k = 0; k < N; ++k) acc += coef[k] * basis[k * 2 * N + n];
      out[f * N + n] += acc * window[n] * 2.0 / static_cast<double>(N);
    }
  }
  Waveform result;
  result.sample_rate_hz = w.sample_rate_hz;
  result.samples.assign(out.begin() + static_cast<long>(N),
                        out.begin() + static_cast<long>(N + w.size()));
  ClipInPlace(&result);
  return result;
}

Waveform CodecLossyExternal(const Waveform& w, const std::string& command_template) {
  if (!CommandAvailable(command_template)) {
    throw Error("external encoder not found: " + command_template);
  }
  namespace fs = std::filesystem;
  static std::mutex mu;
  static int counter = 0;
  int id;
  {
    std::lock_guard<std::mutex> lock(mu);
    id = counter++;
  }
  fs::path dir = fs::temp_directory_path() /
                 ("lidwb-codec-" + std::to_string(getpid()) + "-" + std::to_string(id));
  fs::create_directories(dir);
  fs::path in = dir / "in.wav", out = dir / "out.wav";
  WriteWav(in, w);
  std::string cmd = command_template;
  ReplaceAll(&cmd, "{in}", "'" + in.string() + "'");
  ReplaceAll(&cmd, "{out}", "'" + out.string() + "'");
  int rc = std::system(cmd.c_str());
  if (rc != 0 || !fs::exists(out)) {
    fs::remove_all(dir);
    throw Error("external encoder failed (" + std::to_string(rc) + "): " + cmd);
  }
  Waveform dec = Resample(ReadWav(out).at(0), w.sample_rate_hz);
  fs::remove_all(dir);
  dec.samples.resize(w.size(), 0.0);
  ClipInPlace(&dec);
  return dec;
}

}  // namespace lidwb::augment
