// tests/test_audio_io.cc

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

#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <fstream>

#include "lidwb/audio_io.h"
#include "lidwb/util/error.h"
#include "lidwb/util/rng.h"
#include "test_support.h"

using namespace lidwb;

namespace {

void PutU32(std::string* s, uint32_t v) {
  for (int k = 0; k < 4; ++k) s->push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}
void PutU16(std::string* s, uint16_t v) {
  s->push_back(static_cast<char>(v & 0xff));
  s->push_back(static_cast<char>(v >> 8));
}

// Hand-built RIFF file, independent of WriteWav.
std::string WavBytes(const std::vector<int16_t>& pcm, uint32_t rate, uint16_t channels = 1,
                     uint16_t bits = 16, uint32_t claimed_data = 0) {
  std::string d;
  for (int16_t v : pcm) PutU16(&d, static_cast<uint16_t>(v));
  std::string s = "RIFF";
  PutU32(&s, static_cast<uint32_t>(36 + d.size()));
  s += "WAVEfmt ";
  PutU32(&s, 16);
  PutU16(&s, 1);
  PutU16(&s, channels);
  PutU32(&s, rate);
  PutU32(&s, rate * channels * bits / 8);
  PutU16(&s, static_cast<uint16_t>(channels * bits / 8));
  PutU16(&s, bits);
  s += "data";
  PutU32(&s, claimed_data ? claimed_data : static_cast<uint32_t>(d.size()));
  return s + d;
}

std::filesystem::path WriteBytes(const std::string& name, const std::string& bytes) {
  auto p = test::TempDir("wav") / name;
  std::ofstream(p, std::ios::binary) << bytes;
  return p;
}

// Frame energies computed directly, as the VAD oracle.
size_t ActiveHops(const Waveform& w, double threshold_db) {
  const size_t hop = 80, win = 200;
  const size_t hops = w.size() / hop;
  std::vector<double> e(hops);
  double mx = -1e300;
  for (size_t h = 0; h < hops; ++h) {
    long c = static_cast<long>(h * hop + hop / 2);
    long lo = std::max<long>(0, c - static_cast<long>(win / 2));
    long hi = std::min<long>(static_cast<long>(w.size()), lo + static_cast<long>(win));
    double s = 0;
    for (long i = lo; i < hi; ++i) s += w.samples[i] * w.samples[i];
    e[h] = s > 1e-10 ? 10.0 * std::log10(s) : -1e300;
    mx = std::max(mx, e[h]);
  }
  size_t n = 0;
  for (double v : e) n += v > mx - threshold_db;
  return n;
}

}  // namespace

TEST_SUITE("audio_io") {

TEST_CASE("read_wav scales by 1/32768") {
  auto p = WriteBytes("scale.wav", WavBytes({0, 16384, -32768}, 8000));
  auto ch = ReadWav(p);
  REQUIRE(ch.size() == 1);
  REQUIRE(ch[0].size() == 3);
  CHECK(ch[0].samples[0] == 0.0);
  CHECK(ch[0].samples[1] == 0.5);
  CHECK(ch[0].samples[2] == -1.0);
}

TEST_CASE("read_wav keeps the file rate") {
  auto p = WriteBytes("rate.wav", WavBytes({1, 2, 3, 4}, 16000));
  CHECK(ReadWav(p)[0].sample_rate_hz == 16000);
}

TEST_CASE("stereo comes back as two channels") {
  auto p = WriteBytes("stereo.wav", WavBytes({100, -100, 200, -200}, 8000, 2));
  auto ch = ReadWav(p);
  REQUIRE(ch.size() == 2);
  CHECK(ch[0].samples == std::vector<double>{100 / 32768.0, 200 / 32768.0});
  CHECK(ch[1].samples == std::vector<double>{-100 / 32768.0, -200 / 32768.0});
}

TEST_CASE("truncated data chunk is a malformed container") {
  auto p = WriteBytes("trunc.wav", WavBytes({1, 2, 3}, 8000, 1, 16, 400));
  try {
    ReadWav(p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("malformed container") != std::string::npos);
  }
}

TEST_CASE("unsupported bit depth is rejected") {
  std::string b = WavBytes({1, 2}, 8000, 1, 8);
  CHECK_THROWS_AS(ReadWav(WriteBytes("b8.wav", b)), Error);
}

TEST_CASE("wav round trip is bit exact on 16-bit values") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Waveform w;
    size_t n = static_cast<size_t>(UniformInt(rng, 1, 3000));
    for (size_t i = 0; i < n; ++i) w.samples.push_back(UniformInt(rng, -32768, 32767) / 32768.0);
    auto p = test::TempDir("rt") / "x.wav";
    WriteWav(p, w);
    auto back = ReadWav(p);
    REQUIRE(back.size() == 1);
    CHECK(back[0].samples == w.samples);
  }
}

TEST_CASE("writes clip to [-1, 1]") {
  Waveform w;
  w.samples = {2.0, -3.0, 0.25};
  auto p = test::TempDir("clip") / "c.wav";
  WriteWav(p, w);
  auto back = ReadWav(p)[0].samples;
  CHECK(back[0] == doctest::Approx(32767 / 32768.0));
  CHECK(back[1] == -1.0);
  CHECK(back[2] == 0.25);
}

TEST_CASE("resample length arithmetic and identity") {
  Waveform w = test::Sine(440.0, 1.0, 0.5, 16000);
  Waveform d = Resample(w, 8000);
  CHECK(d.size() == 8000);
  CHECK(d.sample_rate_hz == 8000);
  Waveform same = Resample(w, 16000);
  CHECK(same.samples == w.samples);
  Waveform odd = test::Sine(100.0, 0.0331, 0.5, 11025);
  CHECK(Resample(odd, 8000).size() ==
        static_cast<size_t>(std::llround(odd.size() * 8000.0 / 11025.0)));
}

TEST_CASE("resampled sine keeps its frequency") {
  Waveform w = test::Sine(440.0, 0.5, 0.5, 16000);
  Waveform d = Resample(w, 8000);
  double peak = test::DftPeakHz(d.samples, 8000);
  CHECK(std::fabs(peak - 440.0) <= test::BinHz(d.size(), 8000));
}

TEST_CASE("vad rejects silence") {
  Waveform z;
  z.samples.assign(8000, 0.0);
  try {
    VadTrim(z);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "no active speech");
  }
}

TEST_CASE("vad keeps a steady sine whole") {
  Waveform w = test::Sine(300.0, 1.234);
  CHECK(VadTrim(w).size() == VadFramedLength(w));
}

TEST_CASE("vad removes a one second gap") {
  Waveform a = test::Sine(300.0, 1.0), b = test::Sine(300.0, 1.0);
  Waveform w = a;
  w.samples.insert(w.samples.end(), 8000, 0.0);
  w.samples.insert(w.samples.end(), b.samples.begin(), b.samples.end());
  Waveform t = VadTrim(w);
  const size_t expected = ActiveHops(w, 40.0) * 80;
  CHECK(t.size() == expected);
  const double removed = static_cast<double>(VadFramedLength(w) - t.size());
  CHECK(std::fabs(removed - 8000.0) <= 2 * 80);
}

TEST_CASE("vad output order and idempotence") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Waveform w;
    for (int seg = 0; seg < 6; ++seg) {
      double amp = seg % 2 ? 0.0 : Uniform(rng, 0.1, 0.9);
      Waveform s = test::Sine(Uniform(rng, 100, 3000), Uniform(rng, 0.1, 0.5), amp);
      w.samples.insert(w.samples.end(), s.samples.begin(), s.samples.end());
    }
    Waveform t = VadTrim(w);
    CHECK(t.size() <= VadFramedLength(w));
    Waveform t2 = VadTrim(t);
    CHECK(static_cast<double>(t.size()) - static_cast<double>(t2.size()) <= 2 * 80);
  }
}

TEST_CASE("chunking") {
  Waveform ten = test::Sine(200.0, 10.0);
  auto c = ChunkWaveform(ten, 3.0, "u");
  REQUIRE(c.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(c[k].index == k);
    CHECK(c[k].parent_id == "u");
    CHECK(c[k].waveform.size() == 24000);
    CHECK(c[k].waveform.samples.front() == ten.samples[k * 24000]);
  }
  CHECK(ChunkWaveform(test::Sine(200.0, 2.0), 3.0).empty());
  CHECK(ChunkWaveform(test::Sine(200.0, 9.0), 3.0).size() == 3);
}

TEST_CASE("chunk lengths plus discard equal the input") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    Waveform w;
    w.samples.assign(static_cast<size_t>(UniformInt(rng, 0, 100000)), 0.1);
    double d = Uniform(rng, 0.1, 4.0);
    auto c = ChunkWaveform(w, d);
    const size_t per = static_cast<size_t>(std::llround(d * 8000));
    size_t total = 0;
    for (const auto& ch : c) {
      CHECK(ch.waveform.size() == per);
      total += ch.waveform.size();
    }
    CHECK(w.size() - total < per);
  }
}

}  // TEST_SUITE
