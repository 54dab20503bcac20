// src/features.cc

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

#include "lidwb/features.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "lidwb/dsp.h"
#include "lidwb/util/error.h"
#include "lidwb/util/fft.h"
#include "lidwb/util/rng.h"

namespace lidwb {
namespace {

struct Framing {
  size_t frame;
  size_t hop;
  size_t fft;
};

Framing FramingFor(int rate, const FeatureOptions& opts) {
  Framing f;
  f.frame = static_cast<size_t>(std::llround(opts.frame_ms * 1e-3 * rate));
  f.hop = static_cast<size_t>(std::llround(opts.hop_ms * 1e-3 * rate));
  f.fft = NextPow2(f.frame);
  if (f.frame == 0 || f.hop == 0) throw Error("features: frame shorter than one sample");
  return f;
}

// [filters x bins] triangular weights.
Matrix MelWeights(int rate, size_t fft, const FeatureOptions& opts) {
  const size_t bins = fft / 2 + 1;
  const int nf = opts.num_filters;
  double mel_hi = HzToMel(rate / 2.0);
  std::vector<double> edges(nf + 2);
  for (int i = 0; i < nf + 2; ++i) edges[i] = MelToHz(mel_hi * i / (nf + 1));
  Matrix w = Matrix::Zero(nf, static_cast<Eigen::Index>(bins));
  for (int m = 0; m < nf; ++m) {
    for (size_t k = 0; k < bins; ++k) {
      double hz = static_cast<double>(k) * rate / static_cast<double>(fft);
      double up = (hz - edges[m]) / (edges[m + 1] - edges[m]);
      double down = (edges[m + 2] - hz) / (edges[m + 2] - edges[m + 1]);
      w(m, static_cast<Eigen::Index>(k)) = std::max(0.0, std::min(up, down));
    }
  }
  return w;
}

uint32_t ReadU32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void WriteU32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

constexpr uint32_t kCacheVersion = 1;

}  // namespace

size_t NumFrames(size_t n, int sample_rate, const FeatureOptions& opts) {
  Framing f = FramingFor(sample_rate, opts);
  if (n < f.frame) return 0;
  return (n - f.frame) / f.hop + 1;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> MelCenters(int sample_rate, const FeatureOptions& opts) {
  double mel_hi = HzToMel(sample_rate / 2.0);
  std::vector<double> c(opts.num_filters);
  for (int m = 0; m < opts.num_filters; ++m) {
    c[m] = MelToHz(mel_hi * (m + 1) / (opts.num_filters + 1));
  }
  return c;
}

FeatureMatrix MelFilterbank(const Waveform& w, const FeatureOptions& opts) {
  Framing fr = FramingFor(w.sample_rate_hz, opts);
  if (w.size() < fr.frame) throw Error("features: input shorter than one frame");
  size_t t = NumFrames(w.size(), w.sample_rate_hz, opts);
  Matrix weights = MelWeights(w.sample_rate_hz, fr.fft, opts);
  std::vector<double> window = dsp::Hamming(fr.frame);
  std::vector<double> buf(fr.frame);
  Matrix power(static_cast<Eigen::Index>(t), weights.cols());
  for (size_t i = 0; i < t; ++i) {
    for (size_t n = 0; n < fr.frame; ++n) buf[n] = w.samples[i * fr.hop + n] * window[n];
    std::vector<double> p = PowerSpectrum(buf, fr.fft);
    for (size_t k = 0; k < p.size(); ++k) power(static_cast<Eigen::Index>(i), k) = p[k];
  }
  FeatureMatrix out;
  out.kind = FeatureKind::kMfb;
  out.data = (power * weights.transpose()).array().max(opts.log_floor).log().matrix();
  return out;
}

Matrix DctMatrix(int n) {
  Matrix d(n, n);
  for (int k = 0; k < n; ++k) {
    double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) d(k, i) = scale * std::cos(M_PI * k * (2 * i + 1) / (2.0 * n));
  }
  return d;
}

FeatureMatrix CepstraFromMfb(const FeatureMatrix& mfb, int num_ceps) {
  if (mfb.kind != FeatureKind::kMfb) throw Error("cepstra: input is not a filterbank matrix");
  const auto f = static_cast<int>(mfb.dims());
  if (num_ceps > f) throw Error("cepstra: more coefficients than filters");
  Matrix d = DctMatrix(f).topRows(num_ceps);
  FeatureMatrix out;
  out.kind = FeatureKind::kMfcc;
  out.data = mfb.data * d.transpose();
  return out;
}

void ApplyCms(FeatureMatrix* f) {
  if (f->frames() == 0) return;
  Eigen::RowVectorXd mean = f->data.colwise().mean();
  f->data.rowwise() -= mean;
}

FeatureMatrix MfccFromMfb(const FeatureMatrix& mfb, int num_ceps) {
  FeatureMatrix c = CepstraFromMfb(mfb, num_ceps);
  ApplyCms(&c);
  return c;
}

FeatureMatrix Mfcc(const Waveform& w, const FeatureOptions& opts) {
  return MfccFromMfb(MelFilterbank(w, opts), opts.num_ceps);
}

SpecAugParams DrawSpecAug(const FeatureMatrix& mfb, uint64_t seed, const SpecAugOptions& opts) {
  Rng rng(seed);
  SpecAugParams p;
  const auto t = static_cast<int>(mfb.frames());
  const auto f = static_cast<int>(mfb.dims());
  if (t > 2 * opts.warp_frames + 1 && opts.warp_frames > 0) {
    p.warp_centre = UniformInt(rng, opts.warp_frames, t - 1 - opts.warp_frames);
    p.warp_shift = UniformInt(rng, -opts.warp_frames, opts.warp_frames);
  }
  p.freq_width = std::min(f, UniformInt(rng, 0, opts.max_freq_mask));
  p.freq_start = UniformInt(rng, 0, f - p.freq_width);
  p.time_width = std::min(t, UniformInt(rng, 0, opts.max_time_mask));
  p.time_start = UniformInt(rng, 0, t - p.time_width);
  return p;
}

FeatureMatrix ApplySpecAug(const FeatureMatrix& mfb, const SpecAugParams& p) {
  const Eigen::Index t = mfb.frames(), f = mfb.dims();
  FeatureMatrix out = mfb;
  // Time warp: the segment [0, c] is stretched onto [0, c + shift] and
  // [c, T-1] onto [c + shift, T-1], sampling with linear interpolation.
  if (p.warp_shift != 0 && t > 2) {
    const double c = p.warp_centre, d = p.warp_centre + p.warp_shift;
    if (c > 0 && c < t - 1 && d > 0 && d < t - 1) {
      for (Eigen::Index i = 0; i < t; ++i) {
        double src = i <= d ? i * c / d : c + (i - d) * (t - 1 - c) / (t - 1 - d);
        auto lo = static_cast<Eigen::Index>(std::floor(src));
        Eigen::Index hi = std::min(lo + 1, t - 1);
        double a = src - static_cast<double>(lo);
        out.data.row(i) = (1.0 - a) * mfb.data.row(lo) + a * mfb.data.row(hi);
      }
    }
  }
  const double fill = mfb.data.mean();
  Eigen::Index fw = std::clamp<Eigen::Index>(p.freq_width, 0, f);
  Eigen::Index fs = std::clamp<Eigen::Index>(p.freq_start, 0, f - fw);
  Eigen::Index tw = std::clamp<Eigen::Index>(p.time_width, 0, t);
  Eigen::Index ts = std::clamp<Eigen::Index>(p.time_start, 0, t - tw);
  if (fw > 0) out.data.middleCols(fs, fw).setConstant(fill);
  if (tw > 0) out.data.middleRows(ts, tw).setConstant(fill);
  return out;
}

std::pair<FeatureMatrix, MixupPair> Mixup(const FeatureMatrix& xi, int yi, const FeatureMatrix& xj,
                                          int yj, int num_labels, double alpha, uint64_t seed,
                                          std::optional<double> theta_override) {
  if (xi.dims() != xj.dims()) throw Error("mixup: feature dimension mismatch");
  if (yi < 0 || yj < 0 || yi >= num_labels || yj >= num_labels) {
    throw Error("mixup: label out of range");
  }
  if (!(alpha > 0.0)) throw Error("mixup: alpha must be positive");
  double theta;
  if (theta_override) {
    theta = *theta_override;
  } else {
    Rng rng(seed);
    theta = BetaSample(rng, alpha, alpha);
  }
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error("mixup: theta outside [0, 1]");
  Eigen::Index t = std::min(xi.frames(), xj.frames());
  FeatureMatrix x;
  x.kind = xi.kind;
  x.data = theta * xi.data.topRows(t) + (1.0 - theta) * xj.data.topRows(t);
  MixupPair pair;
  pair.theta = theta;
  pair.soft_label.assign(num_labels, 0.0);
  pair.soft_label[yi] += theta;
  pair.soft_label[yj] += 1.0 - theta;
  return {std::move(x), std::move(pair)};
}

Ltas ComputeLtas(const std::vector<Waveform>& ws) {
  if (ws.empty()) throw Error("ltas: empty input");
  Ltas out;
  out.sample_rate = ws[0].sample_rate_hz;
  FeatureOptions opts;
  Framing fr = FramingFor(out.sample_rate, opts);
  out.fft_size = fr.fft;
  out.db.assign(fr.fft / 2 + 1, 0.0);
  std::vector<double> window = dsp::Hamming(fr.frame);
  std::vector<double> buf(fr.frame);
  for (const Waveform& w : ws) {
    if (w.sample_rate_hz != out.sample_rate) throw Error("ltas: mixed sample rates");
    size_t t = NumFrames(w.size(), w.sample_rate_hz, opts);
    for (size_t i = 0; i < t; ++i) {
      for (size_t n = 0; n < fr.frame; ++n) buf[n] = w.samples[i * fr.hop + n] * window[n];
      std::vector<double> p = PowerSpectrum(buf, fr.fft);
      for (size_t k = 0; k < p.size(); ++k) out.db[k] += 10.0 * std::log10(p[k] + 1e-20);
    }
    out.frames += t;
  }
  if (out.frames == 0) throw Error("ltas: no complete frame in input");
  for (double& v : out.db) v /= static_cast<double>(out.frames);
  return out;
}

void WriteFeatures(const std::filesystem::path& path, const FeatureMatrix& f) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write feature file: " + path.string());
  out.write("LWFM", 4);
  WriteU32(out, kCacheVersion);
  WriteU32(out, static_cast<uint32_t>(f.frames()));
  WriteU32(out, static_cast<uint32_t>(f.dims()));
  WriteU32(out, static_cast<uint32_t>(f.kind));
  for (Eigen::Index i = 0; i < f.frames(); ++i) {
    for (Eigen::Index j = 0; j < f.dims(); ++j) {
      auto v = static_cast<float>(f.data(i, j));
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      WriteU32(out, bits);
    }
  }
}

FeatureMatrix ReadFeatures(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open feature file: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "LWFM", 4) != 0) throw Error("bad feature file: " + path.string());
  if (ReadU32(in) != kCacheVersion) throw Error("unsupported feature file version");
  uint32_t t = ReadU32(in), f = ReadU32(in), kind = ReadU32(in);
  if (kind > 1) throw Error("bad feature kind in " + path.string());
  FeatureMatrix out;
  out.kind = static_cast<FeatureKind>(kind);
  out.data.resize(t, f);
  for (uint32_t i = 0; i < t; ++i) {
    for (uint32_t j = 0; j < f; ++j) {
      uint32_t bits = ReadU32(in);
      float v;
      std::memcpy(&v, &bits, 4);
      out.data(i, j) = v;
    }
  }
  if (!in) throw Error("truncated feature file: " + path.string());
  return out;
}

}  // namespace lidwb
