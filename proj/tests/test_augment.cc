// tests/test_augment.cc

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
#include <set>

#include "lidwb/augment.h"
#include "lidwb/features.h"
#include "lidwb/util/error.h"
#include "lidwb/util/rng.h"
#include "test_support.h"

using namespace lidwb;
using namespace lidwb::augment;

namespace {

Manifest Originals(int n) {
  Manifest m;
  for (int i = 0; i < n; ++i) {
    UtteranceRecord r;
    r.utt_id = "u" + std::to_string(i);
    r.corpus_id = "c";
    r.language = i % 2 ? "x" : "y";
    r.speaker_id = "s" + std::to_string(i % 7);
    r.path = r.utt_id + ".wav";
    m.rows.push_back(r);
  }
  return m;
}

// Mean band power in dB between lo and hi, from a direct Goertzel-free DFT
// over 256-sample frames.
double BandDb(const std::vector<double>& x, double lo, double hi, int rate = 8000) {
  const size_t n = 256;
  double acc = 0.0;
  size_t cnt = 0;
  for (size_t start = 0; start + n <= x.size(); start += n) {
    for (size_t k = 1; k < n / 2; ++k) {
      double f = static_cast<double>(k) * rate / n;
      if (f < lo || f > hi) continue;
      std::complex<double> s = 0.0;
      for (size_t i = 0; i < n; ++i) {
        s += x[start + i] * std::polar(1.0, -2.0 * M_PI * k * i / static_cast<double>(n));
      }
      acc += std::norm(s);
      ++cnt;
    }
  }
  return 10.0 * std::log10(acc / cnt + 1e-300);
}

std::vector<double> SchroederDb(const std::vector<double>& h) {
  std::vector<double> edc(h.size());
  double tail = 0.0;
  for (size_t i = h.size(); i-- > 0;) {
    tail += h[i] * h[i];
    edc[i] = tail;
  }
  const double total = edc[0];
  for (double& v : edc) v = 10.0 * std::log10(v / total + 1e-300);
  return edc;
}

}  // namespace

TEST_SUITE("augment") {

TEST_CASE("category table") {
  CHECK(SubCategories(1).size() == 3);
  CHECK(SubCategories(2).size() == 4);
  CHECK(SubCategories(3).size() == 3);
  CHECK(SubCategories(4).size() == 5);
  CHECK(SubCategories(5).size() == 3);
  CHECK(SubCategories(6).size() == 4);
  CHECK(SubCategories(7).size() == 6);
  CHECK(AugCategory::Parse("A3:telephone").id == 3);
  CHECK(AugCategory::Parse("A0").Tag() == "A0");
  CHECK_THROWS_AS(AugCategory::Parse("A0:pitch"), Error);
  CHECK_THROWS_AS(AugCategory::Parse("A2:telephone"), Error);
  CHECK_THROWS_AS(AugCategory::Parse("A8:x"), Error);
}

TEST_CASE("nonspeech at high snr is near identity") {
  Waveform w = test::Sine(300.0, 1.0, 0.4);
  for (NonSpeech k : {NonSpeech::kNoise, NonSpeech::kBabble, NonSpeech::kMusic}) {
    Waveform o = AddNonSpeech(w, k, 60.0, 11);
    CHECK(test::RelErrorDb(w.samples, o.samples) < -40.0);
  }
}

TEST_CASE("nonspeech on silence fails") {
  Waveform z;
  z.samples.assign(4000, 0.0);
  try {
    AddNonSpeech(z, NonSpeech::kNoise, 10.0, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "silent input");
  }
}

TEST_CASE("white noise at 0 dB gives 0 dB") {
  Waveform w = test::Sine(440.0, 2.0, 0.2);
  std::vector<double> noise = test::WhiteNoise(w.size(), 1.0, 4).samples;
  Waveform o = AddNonSpeech(w, NonSpeech::kNoise, 0.0, 2, &noise);
  std::vector<double> added(w.size());
  for (size_t i = 0; i < w.size(); ++i) added[i] = o.samples[i] - w.samples[i];
  double snr = 10.0 * std::log10(test::Power(w.samples) / test::Power(added));
  CHECK(std::fabs(snr) <= 0.5);
}

TEST_CASE("generated nonspeech hits the requested snr") {
  Rng rng(17);
  for (int trial = 0; trial < 12; ++trial) {
    Waveform w = test::Sine(Uniform(rng, 150, 2500), 1.5, 0.1);
    double snr = Uniform(rng, 0.0, 20.0);
    NonSpeech kind = static_cast<NonSpeech>(trial % 3);
    Waveform o = AddNonSpeech(w, kind, snr, static_cast<uint64_t>(trial));
    std::vector<double> added(w.size());
    for (size_t i = 0; i < w.size(); ++i) added[i] = o.samples[i] - w.samples[i];
    double got = 10.0 * std::log10(test::Power(w.samples) / test::Power(added));
    CHECK(std::fabs(got - snr) <= 0.5);
  }
}

TEST_CASE("pitch") {
  Waveform w = test::Sine(300.0, 1.0, 0.4);
  CHECK(test::RelErrorDb(w.samples, PerturbPitch(w, 0.0).samples) < -30.0);
  Waveform s = test::Sine(200.0, 1.0, 0.4);
  Waveform up = PitchShiftByRatio(s, 2.0);
  CHECK(up.size() == s.size());
  CHECK(std::fabs(test::DftPeakHz(up.samples, 8000) - 400.0) <= test::BinHz(up.size(), 8000));
  CHECK(PerturbPitch(test::Sine(250.0, 0.77), 4.0).size() == test::Sine(250.0, 0.77).size());
  CHECK_THROWS_AS(PerturbPitch(w, 4.5), Error);
  CHECK_THROWS_AS(PerturbPitch(w, -4.01), Error);
}

TEST_CASE("speed length law") {
  Waveform w;
  w.samples.assign(80000, 0.1);
  CHECK(PerturbSpeed(w, 15.0).size() == 68000);
  CHECK(PerturbSpeed(w, -15.0).size() == 92000);
  Waveform s = test::Sine(300.0, 1.0);
  CHECK(PerturbSpeed(s, 0.0).samples == s.samples);
  CHECK_THROWS_AS(PerturbSpeed(s, 16.0), Error);
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    double g = Uniform(rng, -15.0, 15.0);
    Waveform x;
    x.samples.assign(static_cast<size_t>(UniformInt(rng, 1000, 30000)), 0.2);
    CHECK(PerturbSpeed(x, g).size() ==
          static_cast<size_t>(std::llround((100.0 - g) / 100.0 * x.size())));
  }
}

TEST_CASE("volume") {
  Waveform s = test::Sine(250.0, 0.5, 0.5);
  CHECK(PerturbVolume(s, 0.0).samples == s.samples);
  Waveform q = PerturbVolume(s, -20.0);
  double peak = 0.0;
  for (double v : q.samples) peak = std::max(peak, std::fabs(v));
  CHECK(peak == doctest::Approx(0.05 * test::Peak(s.samples) / 0.5).epsilon(1e-12));
  Waveform loud = PerturbVolume(s, 40.0);
  CHECK(test::Peak(loud.samples) == 1.0);
}

TEST_CASE("shift swap") {
  Waveform w;
  w.samples = {1, 2, 3, 4};
  CHECK(ShiftSwap(w, 2).samples == std::vector<double>{3, 4, 1, 2});
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    Waveform x = test::WhiteNoise(static_cast<size_t>(UniformInt(rng, 10, 5000)), 0.2,
                                  static_cast<uint64_t>(trial));
    size_t split = static_cast<size_t>(UniformInt(rng, 0, static_cast<int>(x.size())));
    Waveform y = ShiftSwap(x, split);
    CHECK(ShiftSwap(y, x.size() - split).samples == x.samples);
    std::vector<double> a = x.samples, b = y.samples;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
}

TEST_CASE("shift plan split stays inside [0.2, 0.8]") {
  for (uint64_t s = 0; s < 200; ++s) {
    double f = DrawPlan({2, "shift"}, s).params.at("split_fraction");
    CHECK(f >= 0.2);
    CHECK(f <= 0.8);
  }
}

TEST_CASE("bandlimit responses") {
  Waveform hi = test::Sine(3500.0, 1.0, 0.5);
  Waveform cut = Bandlimit(hi, BandMode::kUpperCut, 3000.0);
  CHECK(test::RmsDb(cut.samples) - test::RmsDb(hi.samples) <= -30.0);
  Waveform mid = test::Sine(1000.0, 1.0, 0.5);
  Waveform pass = Bandlimit(mid, BandMode::kLowerCut, 100.0);
  CHECK(std::fabs(test::RmsDb(pass.samples) - test::RmsDb(mid.samples)) < 1.0);
  CHECK(BandFor(BandMode::kTelephone, 3500.0, 8000).low_hz == 300.0);
  CHECK(BandFor(BandMode::kTelephone, 4000.0, 8000).high_hz < 4000.0);
  CHECK(BandFor(BandMode::kUpperCut, 2800.0, 8000).low_hz == 20.0);
  CHECK(BandFor(BandMode::kLowerCut, 80.0, 8000).high_hz == 4000.0);
  CHECK(cut.size() == hi.size());
}

TEST_CASE("drawn cutoffs stay in range") {
  for (uint64_t s = 0; s < 100; ++s) {
    double u = DrawPlan({3, "upper_cut"}, s).params.at("cutoff_hz");
    double l = DrawPlan({3, "lower_cut"}, s).params.at("cutoff_hz");
    double t = DrawPlan({3, "telephone"}, s).params.at("cutoff_hz");
    CHECK((u >= 2500 && u <= 3500));
    CHECK((l >= 50 && l <= 200));
    CHECK((t >= 3000 && t <= 4000));
  }
}

TEST_CASE("impulse responses") {
  Waveform w = test::WhiteNoise(3000, 0.2, 8);
  std::vector<double> unit = {1.0};
  Waveform same = ConvolveWithIr(w, unit);
  for (size_t i = 0; i < w.size(); ++i) CHECK(same.samples[i] == doctest::Approx(w.samples[i]));
  const size_t d = 37;
  std::vector<double> delayed(d + 1, 0.0);
  delayed[d] = 1.0;
  Waveform shifted = ConvolveWithIr(test::Sine(200.0, 0.3, 0.3), delayed);
  Waveform src = test::Sine(200.0, 0.3, 0.3);
  for (size_t i = 0; i < d; ++i) CHECK(std::fabs(shifted.samples[i]) < 1e-12);
  for (size_t i = d; i < src.size(); ++i) {
    CHECK(shifted.samples[i] == doctest::Approx(src.samples[i - d]).epsilon(1e-9));
  }
}

TEST_CASE("synthetic rir decays 60 dB at rt60") {
  for (uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    std::vector<double> h = SynthesizeRir(0.5, 8000, rng);
    std::vector<double> edc = SchroederDb(h);
    size_t k = 0;
    while (k < edc.size() && edc[k] > -60.0) ++k;
    double t = static_cast<double>(k) / 8000.0;
    CHECK(t >= 0.45);
    CHECK(t <= 0.55);
  }
}

TEST_CASE("environment presets keep length and range") {
  Waveform w = test::Sine(500.0, 1.0, 0.8);
  for (Environment e : {Environment::kRir, Environment::kVinyl, Environment::kLiveHall,
                        Environment::kSmartphone, Environment::kRadio}) {
    Waveform o = ConvolveEnv(w, e, 3);
    CHECK(o.size() == w.size());
    CHECK(test::Peak(o.samples) <= 1.0);
  }
}

TEST_CASE("enhancement") {
  Waveform clean = test::Sine(700.0, 1.0, 0.4);
  for (EnhanceMethod m : {EnhanceMethod::kSpectralSubtraction, EnhanceMethod::kMmse,
                          EnhanceMethod::kDereverb}) {
    Waveform o = Enhance(clean, m);
    CHECK(o.size() == clean.size());
    CHECK(test::RelErrorDb(clean.samples, o.samples) < 3.0);
    Waveform z;
    z.samples.assign(4000, 0.0);
    Waveform zo = Enhance(z, m);
    CHECK(test::Peak(zo.samples) == 0.0);
  }
  std::vector<double> n = test::WhiteNoise(clean.size(), 1.0, 9).samples;
  double g = std::sqrt(test::Power(clean.samples) / test::Power(n) / 10.0);
  Waveform noisy = clean;
  for (size_t i = 0; i < n.size(); ++i) noisy.samples[i] += g * n[i];
  Waveform den = Enhance(noisy, EnhanceMethod::kSpectralSubtraction);
  double before = test::SegSnrDb(clean.samples, noisy.samples);
  double after = test::SegSnrDb(clean.samples, den.samples);
  CHECK(after - before >= 3.0);
  Waveform tiny;
  tiny.samples.assign(50, 0.1);
  CHECK_THROWS_AS(Enhance(tiny, EnhanceMethod::kMmse), Error);
}

TEST_CASE("waveform codecs") {
  Waveform z;
  z.samples.assign(1000, 0.0);
  CHECK(test::Peak(CodecCompand(z, Codec::kULaw).samples) == 0.0);
  CHECK(test::Peak(CodecCompand(z, Codec::kImaAdpcm).samples) == 0.0);
  Waveform full = test::Sine(1000.0, 1.0, 32767.0 / 32768.0);
  CHECK(test::SnrDb(full.samples, CodecCompand(full, Codec::kULaw).samples) >= 35.0);
  CHECK(test::SnrDb(full.samples, CodecCompand(full, Codec::kALaw).samples) >= 35.0);
  Waveform speech_band = test::Sine(440.0, 1.0, 0.5);
  CHECK(test::SnrDb(speech_band.samples, CodecCompand(speech_band, Codec::kImaAdpcm).samples) >=
        25.0);
  for (Codec c : {Codec::kALaw, Codec::kULaw, Codec::kImaAdpcm, Codec::kOkiAdpcm}) {
    CHECK(CodecCompand(speech_band, c).size() == speech_band.size());
  }
}

TEST_CASE("g711 reference codes") {
  // Published G.711 code points.
  CHECK(LinearToULaw(0) == 0xff);
  CHECK(LinearToULaw(-8) == 0x7e);
  CHECK(LinearToULaw(32767) == 0x80);
  CHECK(LinearToULaw(-32768) == 0x00);
  CHECK(ULawToLinear(0xff) == 0);
  CHECK(ULawToLinear(0x80) == 32124);
  CHECK(ULawToLinear(0x00) == -32124);
  CHECK(LinearToALaw(0) == 0xd5);
  CHECK(LinearToALaw(32767) == 0xaa);
  CHECK(ALawToLinear(0xd5) == 8);
  CHECK(ALawToLinear(0xaa) == 32256);
  for (int code = 0; code < 256; ++code) {
    CHECK(LinearToULaw(ULawToLinear(static_cast<uint8_t>(code))) ==
          (code == 0x7f ? 0xff : code));
    CHECK(LinearToALaw(ALawToLinear(static_cast<uint8_t>(code))) == code);
  }
}

TEST_CASE("adpcm decoders track the encoder") {
  std::vector<int16_t> pcm;
  for (int i = 0; i < 4000; ++i) {
    pcm.push_back(static_cast<int16_t>(std::lround(8000 * std::sin(2 * M_PI * 300 * i / 8000.0))));
  }
  auto ima = ImaAdpcmDecode(ImaAdpcmEncode(pcm));
  auto oki = OkiAdpcmDecode(OkiAdpcmEncode(pcm));
  REQUIRE(ima.size() == pcm.size());
  REQUIRE(oki.size() == pcm.size());
  for (uint8_t c : ImaAdpcmEncode(pcm)) CHECK(c < 16);
  std::vector<double> r(pcm.begin(), pcm.end()), a(ima.begin(), ima.end()),
      b(oki.begin(), oki.end());
  CHECK(test::SnrDb(r, a) >= 20.0);
  CHECK(test::SnrDb(r, b) >= 15.0);
}

TEST_CASE("lossy simulation") {
  Waveform w = test::WhiteNoise(16000, 0.2, 5);
  LossySimOptions clean;
  clean.quantize = false;
  clean.limit_bandwidth = false;
  for (LossyCodec c : {LossyCodec::kAac, LossyCodec::kGsm, LossyCodec::kMp3, LossyCodec::kOgg,
                       LossyCodec::kOpus, LossyCodec::kWma}) {
    Waveform o = CodecLossySim(w, c, 3, clean);
    CHECK(test::RelErrorDb(w.samples, o.samples) < -30.0);
    Waveform a = CodecLossySim(w, c, 3), b = CodecLossySim(w, c, 3);
    CHECK(a.samples == b.samples);
    CHECK(a.size() == w.size());
  }
  Waveform g = CodecLossySim(w, LossyCodec::kGsm, 1);
  double drop = BandDb(g.samples, 3500.0, 3950.0) - BandDb(w.samples, 3500.0, 3950.0);
  CHECK(drop <= -20.0);
}

TEST_CASE("missing external encoder is named") {
  Waveform w = test::Sine(300.0, 0.2);
  try {
    CodecLossyExternal(w, "/nonexistent/enc {in} {out}");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("/nonexistent/enc") != std::string::npos);
  }
}

TEST_CASE("every category keeps range and determinism") {
  Waveform w = test::Sine(350.0, 1.2, 0.6);
  for (int k = 1; k <= kNumCategories; ++k) {
    for (const auto& s : SubCategories(k)) {
      AugCategory c{k, s};
      Waveform a = Augment(w, c, 99), b = Augment(w, c, 99);
      CHECK_MESSAGE(a.samples == b.samples, c.Tag());
      CHECK_MESSAGE(test::Peak(a.samples) <= 1.0, c.Tag());
      for (double v : a.samples) REQUIRE(std::isfinite(v));
      if (!(k == 2 && s == "speed")) CHECK_MESSAGE(a.size() == w.size(), c.Tag());
    }
  }
}

TEST_CASE("fold sizes") {
  Manifest m = Originals(100);
  FoldConfig pooled{2.0, FoldScenario::kPooled};
  CHECK(SampleFold(m, pooled, 1).rows.size() == 300);
  FoldConfig one{1.0, FoldScenario::kOnePerUtterance};
  Manifest o = SampleFold(m, one, 1);
  std::map<std::string, int> seen;
  for (const auto& r : o.rows) seen[r.IsOriginal() ? r.utt_id : r.source_utt]++;
  CHECK(seen.size() == 100);
  for (const auto& [id, n] : seen) CHECK(n == 2);
  FoldConfig zero{0.0, FoldScenario::kPooled};
  CHECK(SampleFold(m, zero, 1).rows.size() == 100);
}

TEST_CASE("fold cardinality law") {
  for (int n_o : {50, 100, 333}) {
    Manifest m = Originals(n_o);
    for (double g : {0.5, 1.0, 2.0, 3.0, 4.0}) {
      Manifest p = SampleFold(m, {g, FoldScenario::kPooled}, 7);
      double want = std::round((1.0 + g) * n_o);
      CHECK(std::fabs(static_cast<double>(p.rows.size()) - want) <= 1.0);
      p.Validate();
      Manifest u = SampleFold(m, {g, FoldScenario::kOnePerUtterance}, 7);
      if (g == std::floor(g)) CHECK(u.rows.size() == static_cast<size_t>(want));
      std::map<std::string, std::set<std::string>> versions;
      for (const auto& r : u.rows) {
        if (!r.IsOriginal()) versions[r.source_utt].insert(r.augment);
      }
      for (const auto& [id, v] : versions) {
        size_t copies = 0;
        for (const auto& r : u.rows) copies += r.source_utt == id;
        CHECK(v.size() == copies);
      }
    }
  }
}

TEST_CASE("fold per-category fraction") {
  FoldConfig c{2.0, FoldScenario::kPooled};
  CHECK(c.PerCategoryFraction(7) == doctest::Approx(2.0 / 42.0));
  CHECK(c.PerCategoryFraction(2) == doctest::Approx(2.0 / 28.0));
}

TEST_CASE("fold pooled spreads over categories") {
  Manifest p = SampleFold(Originals(100), {2.0, FoldScenario::kPooled}, 3);
  std::map<int, int> per;
  for (const auto& r : p.rows) {
    if (!r.IsOriginal()) per[*r.pseudo_domain]++;
  }
  REQUIRE(per.size() == 7);
  for (const auto& [k, n] : per) CHECK(std::abs(n - 200 / 7) <= 1);
}

TEST_CASE("fold rejects impossible requests") {
  Manifest m = Originals(10);
  CHECK_THROWS_AS(SampleFold(m, {29.0, FoldScenario::kOnePerUtterance}, 1), Error);
  CHECK_THROWS_AS(SampleFold(m, {4.0, FoldScenario::kHalfContentTriple}, 1), Error);
  Manifest h = SampleFold(m, {1.5, FoldScenario::kHalfContentTriple}, 1);
  CHECK(h.rows.size() == 10 + 5 * 3);
}

TEST_CASE("cascade") {
  Waveform w = test::Sine(400.0, 1.0, 0.3);
  AugCategory vol{2, "volume"}, tel{3, "telephone"}, ulaw{6, "u_law"};
  Waveform ab = CascadeApply(w, vol, tel, 5), ba = CascadeApply(w, tel, vol, 5);
  CHECK(test::RelErrorDb(ab.samples, ba.samples) > -200.0);
  CHECK(CascadeApply(w, vol, tel, 5).samples == ab.samples);
  try {
    CascadeApply(w, vol, AugCategory{2, "pitch"}, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "cascade: identical categories");
  }
  CHECK_THROWS_AS(CascadeApply(w, AugCategory{0, ""}, tel, 1), Error);
  // u-law as the second stage is close to identity on a moderate sine.
  Waveform first = ApplyPlan(w, DrawPlan(tel, MixSeed(8, 1)));
  Waveform both = CascadeApply(w, tel, ulaw, 8);
  CHECK(test::RelErrorDb(first.samples, both.samples) < -30.0);
  CHECK(ApplyRecipe(w, "A3:telephone>A6:u_law", 8).samples == both.samples);
}

}  // TEST_SUITE
