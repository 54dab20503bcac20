// src/audio_io.cc

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

#include "lidwb/audio_io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>

#include "lidwb/util/error.h"

namespace lidwb {
namespace {

uint32_t ReadU32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t ReadU16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<unsigned char>* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::vector<unsigned char>* out, uint16_t v) {
  out->push_back(static_cast<unsigned char>(v & 0xff));
  out->push_back(static_cast<unsigned char>(v >> 8));
}

int16_t ToPcm16(double x) {
  if (!std::isfinite(x)) return 0;
  double v = std::round(x * 32768.0);
  v = std::clamp(v, -32768.0, 32767.0);
  return static_cast<int16_t>(v);
}

double BesselI0(double x) {
  double sum = 1.0, term = 1.0, half = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half / k) * (half / k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

// Windowed-sinc kernel sampled on a fine grid; looked up with linear
// interpolation for arbitrary fractional offsets.
class SincTable {
 public:
  static constexpr int kStepsPerSample = 512;
  static constexpr double kBeta = 8.0;
  static constexpr double kHalfTapsPerPhase = 16.0;

  explicit SincTable(double cutoff) : cutoff_(cutoff) {
    half_width_ = static_cast<int>(std::ceil(kHalfTapsPerPhase / cutoff_));
    size_t n = static_cast<size_t>(half_width_) * kStepsPerSample + 2;
    table_.resize(n);
    double norm = BesselI0(kBeta);
    for (size_t i = 0; i < n; ++i) {
      double t = static_cast<double>(i) / kStepsPerSample;
      double r = t / half_width_;
      double window = r >= 1.0 ? 0.0 : BesselI0(kBeta * std::sqrt(1.0 - r * r)) / norm;
      double arg = M_PI * cutoff_ * t;
      double sinc = t == 0.0 ? 1.0 : std::sin(arg) / arg;
      table_[i] = cutoff_ * sinc * window;
    }
  }

  int half_width() const { return half_width_; }

  double operator()(double t) const {
    t = std::fabs(t);
    double pos = t * kStepsPerSample;
    size_t i = static_cast<size_t>(pos);
    if (i + 1 >= table_.size()) return 0.0;
    double frac = pos - static_cast<double>(i);
    return table_[i] + frac * (table_[i + 1] - table_[i]);
  }

 private:
  double cutoff_;
  int half_width_ = 0;
  std::vector<double> table_;
};

}  // namespace

void ClipInPlace(Waveform* w) {
  for (double& s : w->samples) {
    if (!std::isfinite(s)) s = 0.0;
    s = std::clamp(s, -1.0, 1.0);
  }
}

std::vector<Waveform> ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open WAV file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error("malformed container: missing RIFF/WAVE header" + where);
  }
  size_t pos = 12;
  int channels = 0, rate = 0, bits = 0;
  bool have_fmt = false;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    uint32_t size = ReadU32(hdr + 4);
    size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) {
        throw Error("malformed container: truncated fmt chunk" + where);
      }
      uint16_t format = ReadU16(bytes.data() + body);
      channels = ReadU16(bytes.data() + body + 2);
      rate = static_cast<int>(ReadU32(bytes.data() + body + 4));
      bits = ReadU16(bytes.data() + body + 14);
      if (format == 0xFFFE && size >= 26) format = ReadU16(bytes.data() + body + 24);
      if (format != 1) {
        throw Error("unsupported compression code " + std::to_string(format) + where);
      }
      if (bits != 16) throw Error("unsupported bit depth " + std::to_string(bits) + where);
      if (channels < 1 || channels > 2) {
        throw Error("unsupported channel count " + std::to_string(channels) + where);
      }
      if (rate <= 0) throw Error("malformed container: sample rate 0" + where);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw Error("malformed container: data before fmt" + where);
      if (body + size > bytes.size()) {
        throw Error("malformed container: truncated data chunk" + where);
      }
      size_t block = 2 * static_cast<size_t>(channels);
      size_t frames = size / block;
      std::vector<Waveform> out(channels);
      for (auto& w : out) {
        w.sample_rate_hz = rate;
        w.samples.resize(frames);
      }
      for (size_t f = 0; f < frames; ++f) {
        for (int c = 0; c < channels; ++c) {
          auto v = static_cast<int16_t>(ReadU16(bytes.data() + body + f * block + 2 * c));
          out[c].samples[f] = static_cast<double>(v) / 32768.0;
        }
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw Error("malformed container: no data chunk" + where);
}

void WriteWav(const std::filesystem::path& path, std::span<const Waveform> channels) {
  if (channels.empty() || channels.size() > 2) throw Error("WriteWav: need 1 or 2 channels");
  size_t frames = channels[0].size();
  int rate = channels[0].sample_rate_hz;
  for (const auto& c : channels) {
    if (c.size() != frames || c.sample_rate_hz != rate) {
      throw Error("WriteWav: channels differ in length or rate");
    }
  }
  if (rate <= 0) throw Error("WriteWav: sample rate must be positive");
  auto nch = static_cast<uint16_t>(channels.size());
  uint32_t data_bytes = static_cast<uint32_t>(frames * nch * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  PutU32(&out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(&out, 16);
  PutU16(&out, 1);
  PutU16(&out, nch);
  PutU32(&out, static_cast<uint32_t>(rate));
  PutU32(&out, static_cast<uint32_t>(rate) * nch * 2);
  PutU16(&out, static_cast<uint16_t>(nch * 2));
  PutU16(&out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutU32(&out, data_bytes);
  for (size_t f = 0; f < frames; ++f) {
    for (const auto& c : channels) PutU16(&out, static_cast<uint16_t>(ToPcm16(c.samples[f])));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write WAV file: " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

void WriteWav(const std::filesystem::path& path, const Waveform& mono) {
  WriteWav(path, std::span<const Waveform>(&mono, 1));
}

std::vector<double> ResampleBuffer(std::span<const double> x, double ratio, size_t out_len) {
  if (!(ratio > 0.0)) throw Error("ResampleBuffer: ratio must be positive");
  std::vector<double> out(out_len, 0.0);
  if (x.empty()) return out;
  SincTable kernel(std::min(1.0, ratio));
  const int hw = kernel.half_width();
  const auto n_in = static_cast<long>(x.size());
  for (size_t n = 0; n < out_len; ++n) {
    double pos = static_cast<double>(n) / ratio;
    long center = static_cast<long>(std::floor(pos));
    long lo = std::max(0L, center - hw + 1);
    long hi = std::min(n_in - 1, center + hw);
    double acc = 0.0;
    for (long k = lo; k <= hi; ++k) acc += x[k] * kernel(pos - static_cast<double>(k));
    out[n] = acc;
  }
  return out;
}

Waveform Resample(const Waveform& w, int target_hz) {
  if (target_hz <= 0) throw Error("Resample: target rate must be positive");
  if (w.sample_rate_hz <= 0) throw Error("Resample: source rate must be positive");
  if (target_hz == w.sample_rate_hz) return w;
  double ratio = static_cast<double>(target_hz) / w.sample_rate_hz;
  auto out_len = static_cast<size_t>(std::llround(static_cast<double>(w.size()) * ratio));
  Waveform out;
  out.sample_rate_hz = target_hz;
  out.samples = ResampleBuffer(w.samples, ratio, out_len);
  return out;
}

namespace {

struct VadGeometry {
  size_t hop = 0;
  size_t win = 0;
  size_t frames = 0;
};

VadGeometry Geometry(const Waveform& w, const VadOptions& opts) {
  VadGeometry g;
  g.hop = static_cast<size_t>(std::llround(opts.hop_ms * 1e-3 * w.sample_rate_hz));
  g.win = static_cast<size_t>(std::llround(opts.frame_ms * 1e-3 * w.sample_rate_hz));
  if (g.hop == 0 || g.win == 0) throw Error("VAD: frame/hop shorter than one sample");
  g.frames = w.size() / g.hop;
  return g;
}

}  // namespace

size_t VadFramedLength(const Waveform& w, const VadOptions& opts) {
  VadGeometry g = Geometry(w, opts);
  return g.frames * g.hop;
}

Waveform VadTrim(const Waveform& w, const VadOptions& opts) {
  VadGeometry g = Geometry(w, opts);
  if (w.size() < g.win) throw Error("VAD: input shorter than one frame");
  constexpr double kEnergyFloor = 1e-10;
  std::vector<double> log_energy(g.frames);
  double max_energy = -std::numeric_limits<double>::infinity();
  const auto n = static_cast<long>(w.size());
  for (size_t i = 0; i < g.frames; ++i) {
    long center = static_cast<long>(i * g.hop + g.hop / 2);
    long start = center - static_cast<long>(g.win / 2);
    double e = 0.0;
    for (long k = std::max(0L, start); k < std::min(n, start + static_cast<long>(g.win)); ++k) {
      e += w.samples[k] * w.samples[k];
    }
    log_energy[i] = e > kEnergyFloor ? 10.0 * std::log10(e)
                                     : -std::numeric_limits<double>::infinity();
    max_energy = std::max(max_energy, log_energy[i]);
  }
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  if (!std::isfinite(max_energy)) throw Error("no active speech");
  double threshold = max_energy - opts.threshold_db;
  for (size_t i = 0; i < g.frames; ++i) {
    if (log_energy[i] > threshold) {
      auto begin = w.samples.begin() + static_cast<long>(i * g.hop);
      out.samples.insert(out.samples.end(), begin, begin + static_cast<long>(g.hop));
    }
  }
  if (out.empty()) throw Error("no active speech");
  return out;
}

std::vector<Chunk> ChunkWaveform(const Waveform& w, double duration_s,
                                 const std::string& parent_id) {
  if (!(duration_s > 0.0)) throw Error("chunk duration must be positive");
  auto per_chunk = static_cast<size_t>(std::llround(duration_s * w.sample_rate_hz));
  if (per_chunk == 0) throw Error("chunk duration shorter than one sample");
  std::vector<Chunk> chunks;
  size_t count = w.size() / per_chunk;
  chunks.reserve(count);
  for (size_t c = 0; c < count; ++c) {
    Chunk ch;
    ch.parent_id = parent_id;
    ch.index = static_cast<int>(c);
    ch.waveform.sample_rate_hz = w.sample_rate_hz;
    auto begin = w.samples.begin() + static_cast<long>(c * per_chunk);
    ch.waveform.samples.assign(begin, begin + static_cast<long>(per_chunk));
    chunks.push_back(std::move(ch));
  }
  return chunks;
}

}  // namespace lidwb
