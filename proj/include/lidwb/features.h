// include/lidwb/features.h

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

#ifndef LIDWB_FEATURES_H_
#define LIDWB_FEATURES_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lidwb/audio_io.h"

namespace lidwb {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class FeatureKind { kMfb = 0, kMfcc = 1 };

/// T frames x F coefficients, 25 ms windows every 10 ms.
struct FeatureMatrix {
  Matrix data;
  FeatureKind kind = FeatureKind::kMfcc;

  Eigen::Index frames() const { return data.rows(); }
  Eigen::Index dims() const { return data.cols(); }
};

struct FeatureOptions {
  int num_filters = 20;
  int num_ceps = 20;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double log_floor = 1e-10;
};

/// Frame count for `n` samples: floor((n - frame) / hop) + 1.
size_t NumFrames(size_t n, int sample_rate, const FeatureOptions& opts = {});

/// HTK-style mel scale.
double HzToMel(double hz);
double MelToHz(double mel);

/// Triangle centre frequencies (Hz) of the filterbank used for `sample_rate`.
std::vector<double> MelCenters(int sample_rate, const FeatureOptions& opts = {});

FeatureMatrix MelFilterbank(const Waveform& w, const FeatureOptions& opts = {});

/// n x n orthonormal DCT-II matrix, rows are basis vectors.
Matrix DctMatrix(int n);

/// DCT of MFB rows without mean subtraction.
FeatureMatrix CepstraFromMfb(const FeatureMatrix& mfb, int num_ceps);
/// Subtracts the per-coefficient mean over frames.
void ApplyCms(FeatureMatrix* f);

/// MFB -> DCT -> CMS.
FeatureMatrix MfccFromMfb(const FeatureMatrix& mfb, int num_ceps = 20);
FeatureMatrix Mfcc(const Waveform& w, const FeatureOptions& opts = {});

struct SpecAugOptions {
  int warp_frames = 5;
  int max_freq_mask = 4;
  int max_time_mask = 20;
};

/// Concrete SpecAug decisions, drawn from a seed or set directly by tests.
struct SpecAugParams {
  int warp_centre = 0;  // frame index
  int warp_shift = 0;   // frames, |shift| <= W
  int freq_start = 0;
  int freq_width = 0;
  int time_start = 0;
  int time_width = 0;
};

SpecAugParams DrawSpecAug(const FeatureMatrix& mfb, uint64_t seed,
                          const SpecAugOptions& opts = {});
FeatureMatrix ApplySpecAug(const FeatureMatrix& mfb, const SpecAugParams& p);
inline FeatureMatrix SpecAug(const FeatureMatrix& mfb, uint64_t seed,
                             const SpecAugOptions& opts = {}) {
  return ApplySpecAug(mfb, DrawSpecAug(mfb, seed, opts));
}

struct MixupPair {
  double theta = 1.0;
  std::vector<double> soft_label;
};

/// theta ~ Beta(alpha, alpha) unless `theta_override` is set.
std::pair<FeatureMatrix, MixupPair> Mixup(const FeatureMatrix& xi, int yi, const FeatureMatrix& xj,
                                          int yj, int num_labels, double alpha, uint64_t seed,
                                          std::optional<double> theta_override = std::nullopt);

struct Ltas {
  std::vector<double> db;  // per FFT bin
  size_t frames = 0;
  size_t fft_size = 0;
  int sample_rate = 0;

  double BinHz(size_t k) const {
    return static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
  }
};

/// Mean of per-frame dB power spectra over every 25 ms frame of every input.
Ltas ComputeLtas(const std::vector<Waveform>& ws);

/// Binary cache: "LWFM", u32 version, u32 T, u32 F, u32 kind, then T*F
/// little-endian float32 values, row major.
void WriteFeatures(const std::filesystem::path& path, const FeatureMatrix& f);
FeatureMatrix ReadFeatures(const std::filesystem::path& path);

}  // namespace lidwb

#endif  // LIDWB_FEATURES_H_
