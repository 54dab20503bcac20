// tests/test_features.cc

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

#include "lidwb/dsp.h"
#include "lidwb/features.h"
#include "lidwb/util/error.h"
#include "lidwb/util/rng.h"
#include "test_support.h"

using namespace lidwb;

TEST_SUITE("features") {

TEST_CASE("frame count") {
  FeatureMatrix f = MelFilterbank(test::Sine(300.0, 1.0));
  CHECK(f.frames() == (8000 - 200) / 80 + 1);
  CHECK(f.frames() == 98);
  CHECK(f.dims() == 20);
  Waveform tiny;
  tiny.samples.assign(100, 0.1);
  CHECK_THROWS_AS(MelFilterbank(tiny), Error);
}

TEST_CASE("log floor holds on noise and silence") {
  FeatureMatrix f = MelFilterbank(test::WhiteNoise(8000, 0.1, 3));
  CHECK(f.data.allFinite());
  CHECK(f.data.minCoeff() > std::log(1e-10));
  Waveform z;
  z.samples.assign(4000, 0.0);
  FeatureMatrix g = MelFilterbank(z);
  CHECK(g.data.allFinite());
  CHECK(g.data.minCoeff() >= std::log(1e-10) - 1e-12);
}

TEST_CASE("1 kHz sine peaks in the nearest filter") {
  std::vector<double> centres = MelCenters(8000);
  REQUIRE(centres.size() == 20);
  int nearest = 0;
  for (int k = 1; k < 20; ++k) {
    if (std::fabs(centres[k] - 1000.0) < std::fabs(centres[nearest] - 1000.0)) nearest = k;
  }
  FeatureMatrix f = MelFilterbank(test::Sine(1000.0, 0.5));
  Eigen::Index arg;
  f.data.colwise().mean().maxCoeff(&arg);
  CHECK(arg == nearest);
}

TEST_CASE("mel scale round trip") {
  for (double hz : {0.0, 100.0, 1000.0, 3999.0}) CHECK(MelToHz(HzToMel(hz)) == doctest::Approx(hz));
  CHECK(HzToMel(1000.0) == doctest::Approx(2595.0 * std::log10(1.0 + 1000.0 / 700.0)));
}

TEST_CASE("dct is orthonormal") {
  for (int n : {4, 20, 23}) {
    Matrix d = DctMatrix(n);
    Matrix id = d.transpose() * d;
    CHECK((id - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    // Against the closed form.
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        double s = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        CHECK(d(k, i) == doctest::Approx(s * std::cos(M_PI * k * (i + 0.5) / n)));
      }
    }
  }
}

TEST_CASE("cms zeroes column means") {
  for (uint64_t seed : {1u, 2u, 3u}) {
    FeatureMatrix f = Mfcc(test::WhiteNoise(12000, 0.2, seed));
    CHECK(f.kind == FeatureKind::kMfcc);
    CHECK(f.data.colwise().mean().cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("constant filterbank rows give only a dc cepstrum") {
  FeatureMatrix mfb;
  mfb.kind = FeatureKind::kMfb;
  mfb.data = Matrix::Constant(7, 20, -3.25);
  FeatureMatrix c = CepstraFromMfb(mfb, 20);
  CHECK(c.data.rightCols(19).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(c.data(0, 0) == doctest::Approx(-3.25 * std::sqrt(20.0)));
}

TEST_CASE("mfcc is deterministic") {
  Waveform w = test::WhiteNoise(9000, 0.2, 8);
  CHECK(Mfcc(w).data == Mfcc(w).data);
}

TEST_CASE("specaug") {
  FeatureMatrix mfb = MelFilterbank(test::WhiteNoise(16000, 0.2, 2));
  SpecAugParams none;
  CHECK(ApplySpecAug(mfb, none).data == mfb.data);
  SpecAugParams fm;
  fm.freq_start = 6;
  fm.freq_width = 4;
  FeatureMatrix o = ApplySpecAug(mfb, fm);
  const double fill = mfb.data.mean();
  int rows_filled = 0;
  for (Eigen::Index j = 0; j < o.dims(); ++j) {
    bool all = (o.data.col(j).array() == fill).all();
    rows_filled += all;
    CHECK(all == (j >= 6 && j < 10));
  }
  CHECK(rows_filled == 4);
  SpecAugParams wide;
  wide.freq_start = 15;
  wide.freq_width = 40;
  wide.time_width = 1000;
  FeatureMatrix c = ApplySpecAug(mfb, wide);
  CHECK((c.data.array() == fill).all());
  CHECK(SpecAug(mfb, 5).data == SpecAug(mfb, 5).data);
  for (uint64_t s = 0; s < 50; ++s) {
    SpecAugParams p = DrawSpecAug(mfb, s);
    CHECK(std::abs(p.warp_shift) <= 5);
    CHECK((p.freq_width >= 0 && p.freq_width <= 4));
    CHECK((p.time_width >= 0 && p.time_width <= 20));
    CHECK(ApplySpecAug(mfb, p).data.allFinite());
  }
}

TEST_CASE("time warp keeps the end frames") {
  FeatureMatrix mfb = MelFilterbank(test::WhiteNoise(16000, 0.2, 2));
  SpecAugParams p;
  p.warp_centre = 80;
  p.warp_shift = 5;
  FeatureMatrix o = ApplySpecAug(mfb, p);
  CHECK(o.data.row(0) == mfb.data.row(0));
  CHECK((o.data.row(o.frames() - 1) - mfb.data.row(mfb.frames() - 1)).norm() < 1e-12);
  CHECK((o.data.row(85) - mfb.data.row(80)).norm() < 1e-12);
}

TEST_CASE("mixup") {
  FeatureMatrix a = Mfcc(test::WhiteNoise(8000, 0.2, 1));
  FeatureMatrix b = Mfcc(test::WhiteNoise(9600, 0.2, 2));
  auto [x1, p1] = Mixup(a, 1, b, 3, 5, 0.2, 0, 1.0);
  CHECK(x1.data == a.data.topRows(std::min(a.frames(), b.frames())));
  CHECK(p1.soft_label == std::vector<double>{0, 1, 0, 0, 0});
  auto [xh, ph] = Mixup(a, 1, b, 3, 5, 0.2, 0, 0.5);
  CHECK(ph.soft_label == std::vector<double>{0, 0.5, 0, 0.5, 0});
  const Eigen::Index t = std::min(a.frames(), b.frames());
  CHECK(xh.frames() == t);
  CHECK((xh.data - 0.5 * (a.data.topRows(t) + b.data.topRows(t))).cwiseAbs().maxCoeff() < 1e-12);
  for (uint64_t s = 0; s < 200; ++s) {
    auto [x, p] = Mixup(a, static_cast<int>(s % 5), b, static_cast<int>((s / 5) % 5), 5, 0.2, s);
    double sum = 0.0;
    int nonzero = 0;
    for (double v : p.soft_label) {
      sum += v;
      nonzero += v != 0.0;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(nonzero <= 2);
    CHECK(x.data.allFinite());
  }
  FeatureMatrix bad = a;
  bad.data = Matrix::Zero(10, 13);
  CHECK_THROWS_AS(Mixup(a, 0, bad, 1, 5, 0.2, 0), Error);
}

TEST_CASE("beta(0.2, 0.2) mean") {
  Rng rng(12345);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double t = BetaSample(rng, 0.2, 0.2);
    REQUIRE((t >= 0.0 && t <= 1.0));
    acc += t;
  }
  CHECK(std::fabs(acc / n - 0.5) <= 0.01);
}

TEST_CASE("ltas") {
  Ltas s = ComputeLtas({test::Sine(1500.0, 1.0)});
  size_t arg = static_cast<size_t>(std::max_element(s.db.begin(), s.db.end()) - s.db.begin());
  CHECK(std::fabs(s.BinHz(arg) - 1500.0) <= s.BinHz(1));
  CHECK_THROWS_AS(ComputeLtas({}), Error);

  Waveform a = test::WhiteNoise(5000, 0.3, 1), b = test::WhiteNoise(9000, 0.1, 2);
  Ltas la = ComputeLtas({a}), lb = ComputeLtas({b}), lab = ComputeLtas({a, b});
  REQUIRE(lab.frames == la.frames + lb.frames);
  for (size_t k = 0; k < lab.db.size(); ++k) {
    double want = (la.db[k] * la.frames + lb.db[k] * lb.frames) / lab.frames;
    CHECK(lab.db[k] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("telephone band noise is 20 dB down above 4 kHz") {
  Waveform n = test::WhiteNoise(32000, 0.2, 3, 16000);
  Waveform f = n;
  f.samples = dsp::FilterSame(n.samples, dsp::DesignBandpass(300.0, 3400.0, 16000));
  Ltas l = ComputeLtas({f});
  double pass = 0.0, stop = 0.0;
  int np = 0, ns = 0;
  for (size_t k = 0; k < l.db.size(); ++k) {
    double hz = l.BinHz(k);
    if (hz >= 500 && hz <= 3000) {
      pass += l.db[k];
      ++np;
    }
    if (hz >= 4000) {
      stop += l.db[k];
      ++ns;
    }
  }
  CHECK(pass / np - stop / ns >= 20.0);
}

TEST_CASE("feature cache round trip") {
  FeatureMatrix f = Mfcc(test::WhiteNoise(8000, 0.2, 1));
  auto p = test::TempDir("feat") / "x.feat";
  WriteFeatures(p, f);
  FeatureMatrix g = ReadFeatures(p);
  CHECK(g.kind == f.kind);
  CHECK(g.data == f.data.cast<float>().cast<double>());
}

}  // TEST_SUITE
