// src/augment/codec.cc

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

// G.711 companding follows the public-domain Sun Microsystems reference;
// the ADPCM coders use the IMA and Dialogic step tables.

#include <algorithm>
#include <array>
#include <cmath>

#include "lidwb/augment.h"
#include "lidwb/util/error.h"

namespace lidwb::augment {
namespace {

constexpr std::array<int, 8> kSegAEnd = {0x1F, 0x3F, 0x7F, 0xFF, 0x1FF, 0x3FF, 0x7FF, 0xFFF};
constexpr std::array<int, 8> kSegUEnd = {0x3F,  0x7F,  0xFF,  0x1FF,
                                         0x3FF, 0x7FF, 0xFFF, 0x1FFF};
constexpr int kULawBias = 0x84;
constexpr int kULawClip = 8159;

int Segment(int val, const std::array<int, 8>& table) {
  for (int i = 0; i < 8; ++i) {
    if (val <= table[i]) return i;
  }
  return 8;
}

constexpr std::array<int, 16> kIndexAdjust = {-1, -1, -1, -1, 2, 4, 6, 8,
                                              -1, -1, -1, -1, 2, 4, 6, 8};

constexpr std::array<int, 89> kImaSteps = {
    7,     8,     9,     10,    11,    12,    13,    14,    16,    17,    19,    21,    23,
    25,    28,    31,    34,    37,    41,    45,    50,    55,    60,    66,    73,    80,
    88,    97,    107,   118,   130,   143,   157,   173,   190,   209,   230,   253,   279,
    307,   337,   371,   408,   449,   494,   544,   598,   658,   724,   796,   876,   963,
    1060,  1166,  1282,  1411,  1552,  1707,  1878,  2066,  2272,  2499,  2749,  3024,  3327,
    3660,  4026,  4428,  4871,  5358,  5894,  6484,  7132,  7845,  8630,  9493,  10442, 11487,
    12635, 13899, 15289, 16818, 18500, 20350, 22385, 24623, 27086, 29794, 32767};

constexpr std::array<int, 49> kOkiSteps = {
    16,  17,  19,  21,  23,  25,  28,  31,  34,  37,  41,  45,   50,   55,   60,   66,  73,
    80,  88,  97,  107, 118, 130, 143, 157, 173, 190, 209, 230,  253,  279,  307,  337, 371,
    408, 449, 494, 544, 598, 658, 724, 796, 876, 963, 1060, 1166, 1282, 1411, 1552};

// Shared ADPCM state machine; the two coders differ in step table and range.
class Adpcm {
 public:
  Adpcm(const int* steps, int n_steps, int lo, int hi)
      : steps_(steps), n_steps_(n_steps), lo_(lo), hi_(hi) {}

  uint8_t Encode(int sample) {
    int step = steps_[index_];
    int diff = sample - predictor_;
    uint8_t code = 0;
    if (diff < 0) {
      code = 8;
      diff = -diff;
    }
    if (diff >= step) {
      code |= 4;
      diff -= step;
    }
    if (diff >= (step >> 1)) {
      code |= 2;
      diff -= step >> 1;
    }
    if (diff >= (step >> 2)) code |= 1;
    Decode(code);
    return code;
  }

  int Decode(uint8_t code) {
    int step = steps_[index_];
    int delta = step >> 3;
    if (code & 4) delta += step;
    if (code & 2) delta += step >> 1;
    if (code & 1) delta += step >> 2;
    predictor_ += (code & 8) ? -delta : delta;
    predictor_ = std::clamp(predictor_, lo_, hi_);
    index_ = std::clamp(index_ + kIndexAdjust[code & 15], 0, n_steps_ - 1);
    return predictor_;
  }

 private:
  const int* steps_;
  int n_steps_;
  int lo_, hi_;
  int predictor_ = 0;
  int index_ = 0;
};

Adpcm ImaState() { return Adpcm(kImaSteps.data(), 89, -32768, 32767); }
Adpcm OkiState() { return Adpcm(kOkiSteps.data(), 49, -2048, 2047); }

int16_t ToPcm(double v) {
  double s = std::round(std::clamp(v, -1.0, 1.0) * 32768.0);
  return static_cast<int16_t>(std::clamp(s, -32768.0, 32767.0));
}

}  // namespace

uint8_t LinearToALaw(int16_t pcm) {
  int val = pcm >> 3;
  int mask;
  if (val >= 0) {
    mask = 0xD5;
  } else {
    mask = 0x55;
    val = -val - 1;
  }
  int seg = Segment(val, kSegAEnd);
  if (seg >= 8) return static_cast<uint8_t>(0x7F ^ mask);
  int aval = seg << 4;
  aval |= seg < 2 ? (val >> 1) & 0xF : (val >> seg) & 0xF;
  return static_cast<uint8_t>(aval ^ mask);
}

int16_t ALawToLinear(uint8_t code) {
  int a = code ^ 0x55;
  int t = (a & 0xF) << 4;
  int seg = (a & 0x70) >> 4;
  switch (seg) {
    case 0: t += 8; break;
    case 1: t += 0x108; break;
    default:
      t += 0x108;
      t <<= seg - 1;
  }
  return static_cast<int16_t>((a & 0x80) ? t : -t);
}

uint8_t LinearToULaw(int16_t pcm) {
  int val = pcm >> 2;
  int mask;
  if (val < 0) {
    val = -val;
    mask = 0x7F;
  } else {
    mask = 0xFF;
  }
  val = std::min(val, kULawClip);
  val += kULawBias >> 2;
  int seg = Segment(val, kSegUEnd);
  if (seg >= 8) return static_cast<uint8_t>(0x7F ^ mask);
  int uval = (seg << 4) | ((val >> (seg + 1)) & 0xF);
  return static_cast<uint8_t>(uval ^ mask);
}

int16_t ULawToLinear(uint8_t code) {
  int u = ~code & 0xFF;
  int t = ((u & 0x0F) << 3) + kULawBias;
  t <<= (u & 0x70) >> 4;
  return static_cast<int16_t>((u & 0x80) ? (kULawBias - t) : (t - kULawBias));
}

std::vector<uint8_t> ImaAdpcmEncode(std::span<const int16_t> pcm) {
  Adpcm st = ImaState();
  std::vector<uint8_t> out(pcm.size());
  for (size_t i = 0; i < pcm.size(); ++i) out[i] = st.Encode(pcm[i]);
  return out;
}

std::vector<int16_t> ImaAdpcmDecode(std::span<const uint8_t> codes) {
  Adpcm st = ImaState();
  std::vector<int16_t> out(codes.size());
  for (size_t i = 0; i < codes.size(); ++i) out[i] = static_cast<int16_t>(st.Decode(codes[i]));
  return out;
}

std::vector<uint8_t> OkiAdpcmEncode(std::span<const int16_t> pcm) {
  Adpcm st = OkiState();
  std::vector<uint8_t> out(pcm.size());
  for (size_t i = 0; i < pcm.size(); ++i) out[i] = st.Encode(pcm[i] >> 4);
  return out;
}

std::vector<int16_t> OkiAdpcmDecode(std::span<const uint8_t> codes) {
  Adpcm st = OkiState();
  std::vector<int16_t> out(codes.size());
  for (size_t i = 0; i < codes.size(); ++i) {
    out[i] = static_cast<int16_t>(st.Decode(codes[i]) * 16);
  }
  return out;
}

Waveform CodecCompand(const Waveform& w, Codec codec) {
  std::vector<int16_t> pcm(w.size());
  for (size_t i = 0; i < w.size(); ++i) pcm[i] = ToPcm(w.samples[i]);
  std::vector<int16_t> dec(w.size());
  switch (codec) {
    case Codec::kALaw:
      for (size_t i = 0; i < pcm.size(); ++i) dec[i] = ALawToLinear(LinearToALaw(pcm[i]));
      break;
    case Codec::kULaw:
      for (size_t i = 0; i < pcm.size(); ++i) dec[i] = ULawToLinear(LinearToULaw(pcm[i]));
      break;
    case Codec::kImaAdpcm: dec = ImaAdpcmDecode(ImaAdpcmEncode(pcm)); break;
    case Codec::kOkiAdpcm: dec = OkiAdpcmDecode(OkiAdpcmEncode(pcm)); break;
  }
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples.resize(dec.size());
  for (size_t i = 0; i < dec.size(); ++i) out.samples[i] = dec[i] / 32768.0;
  return out;
}

}  // namespace lidwb::augment
