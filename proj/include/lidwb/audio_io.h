// include/lidwb/audio_io.h

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

#ifndef LIDWB_AUDIO_IO_H_
#define LIDWB_AUDIO_IO_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lidwb {

/// Canonical processing rate of the whole pipeline.
inline constexpr int kCanonicalRateHz = 8000;

/// Mono PCM signal. Samples are nominally in [-1, 1]; writers clip.
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = kCanonicalRateHz;

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

/// Fixed-duration piece of a parent utterance.
struct Chunk {
  std::string parent_id;
  int index = 0;
  Waveform waveform;
};

/// Clamp every sample into [-1, 1] and replace non-finite values by 0.
void ClipInPlace(Waveform* w);

/// Reads a 16-bit PCM RIFF/WAVE file. One Waveform per channel.
std::vector<Waveform> ReadWav(const std::filesystem::path& path);

/// Writes 16-bit PCM. All channels must share length and rate.
void WriteWav(const std::filesystem::path& path, std::span<const Waveform> channels);
void WriteWav(const std::filesystem::path& path, const Waveform& mono);

/// Band-limited (Kaiser windowed-sinc) resampling to target_hz. Output length
/// is round(len * target / source); identical rates return an exact copy.
Waveform Resample(const Waveform& w, int target_hz);

/// Resamples a raw sample buffer by `ratio` (output rate / input rate) to
/// exactly `out_len` samples. Shared by speed and pitch perturbation.
std::vector<double> ResampleBuffer(std::span<const double> x, double ratio, size_t out_len);

struct VadOptions {
  double threshold_db = 40.0;  // below the loudest frame
  double frame_ms = 25.0;
  double hop_ms = 10.0;
};

/// Number of samples VadTrim considers: floor(len / hop) * hop.
size_t VadFramedLength(const Waveform& w, const VadOptions& opts = {});

/// Energy VAD. Each hop-length segment is kept when the centred analysis
/// window around it lies within threshold_db of the loudest frame.
/// Throws Error("no active speech") when nothing passes.
Waveform VadTrim(const Waveform& w, const VadOptions& opts = {});

/// Splits into floor(len / (duration_s * rate)) non-overlapping chunks; the
/// remainder is discarded. Short input yields an empty list.
std::vector<Chunk> ChunkWaveform(const Waveform& w, double duration_s,
                                 const std::string& parent_id = "");

}  // namespace lidwb

#endif  // LIDWB_AUDIO_IO_H_
