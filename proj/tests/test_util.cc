// tests/test_util.cc

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

#include <atomic>
#include <cstdlib>
#include <numeric>

#include "lidwb/util/error.h"
#include "lidwb/util/fft.h"
#include "lidwb/util/parallel.h"
#include "lidwb/util/rng.h"
#include "test_support.h"

using namespace lidwb;

TEST_SUITE("util") {

TEST_CASE("fnv-1a reference values") {
  CHECK(HashString("") == 0xcbf29ce484222325ULL);
  CHECK(HashString("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(HashString("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("derived seeds depend on every part and nothing else") {
  uint64_t a = DeriveSeed(1, {"x", "y"});
  CHECK(a == DeriveSeed(1, {"x", "y"}));
  CHECK(a != DeriveSeed(2, {"x", "y"}));
  CHECK(a != DeriveSeed(1, {"y", "x"}));
  CHECK(a != DeriveSeed(1, {"xy"}));
  CHECK(MixSeed(3, 4) != MixSeed(4, 3));
}

TEST_CASE("uniform helpers stay in range") {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    double u = Uniform(rng, -2.0, 3.0);
    CHECK(u >= -2.0);
    CHECK(u < 3.0);
    int k = UniformInt(rng, 2, 5);
    CHECK(k >= 2);
    CHECK(k <= 5);
  }
}

TEST_CASE("real fft matches a direct dft") {
  for (size_t n : {8u, 30u, 256u}) {
    std::vector<double> x = test::WhiteNoise(n, 1.0, n).samples;
    std::vector<Complex> fx(n / 2 + 1);
    RealFft(x, fx);
    for (size_t k = 0; k <= n / 2; ++k) {
      Complex acc = 0.0;
      for (size_t i = 0; i < n; ++i) {
        acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * k * i / static_cast<double>(n));
      }
      CHECK(std::abs(acc - fx[k]) < 1e-9);
    }
    std::vector<double> back(n);
    InverseRealFft(fx, back);
    for (size_t i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
  }
}

TEST_CASE("fft convolution matches direct convolution") {
  std::vector<double> a = test::WhiteNoise(37, 1.0, 1).samples;
  std::vector<double> b = test::WhiteNoise(11, 1.0, 2).samples;
  std::vector<double> c = FftConvolve(a, b);
  REQUIRE(c.size() == a.size() + b.size() - 1);
  for (size_t n = 0; n < c.size(); ++n) {
    double acc = 0.0;
    for (size_t k = 0; k < b.size(); ++k) {
      if (n >= k && n - k < a.size()) acc += a[n - k] * b[k];
    }
    CHECK(c[n] == doctest::Approx(acc).epsilon(1e-10));
  }
}

TEST_CASE("parallel for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(100);
  ParallelFor(hits.size(), [&](size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(ParallelFor(10, [](size_t i) {
                    if (i == 3) throw Error("boom");
                  }),
                  Error);
}

TEST_CASE("worker count honours the environment") {
  const char* old = std::getenv("LIDWB_THREADS");
  std::string keep = old ? old : "";
  setenv("LIDWB_THREADS", "3", 1);
  CHECK(WorkerCount() == 3);
  if (old) {
    setenv("LIDWB_THREADS", keep.c_str(), 1);
  } else {
    unsetenv("LIDWB_THREADS");
  }
}

}  // TEST_SUITE
