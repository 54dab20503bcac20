// tests/test_harness.cc

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
#include <fstream>
#include <set>
#include <sstream>

#include "lidwb/audio_io.h"
#include "lidwb/features.h"
#include "lidwb/harness/cli.h"
#include "lidwb/harness/config.h"
#include "lidwb/harness/pipeline.h"
#include "lidwb/harness/synth.h"
#include "lidwb/manifest.h"
#include "lidwb/util/error.h"
#include "test_support.h"

using namespace lidwb;
using namespace lidwb::harness;

namespace {

int Cli(const std::vector<std::string>& args, std::string* out, std::string* err) {
  std::ostringstream o, e;
  int rc = RunCli(args, o, e);
  *out = o.str();
  *err = e.str();
  return rc;
}

const char* kBaseConfig =
    "[experiment]\nseed=3\n"
    "[corpus:a]\nstyle=studio\nlanguages=2\nspeakers=2\nutterances=1\nseconds=2\n"
    "[corpus:b]\nstyle=telephone\nlanguages=2\nspeakers=2\nutterances=1\nseconds=2\n";

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("manifest round trip") {
  Manifest m;
  UtteranceRecord a;
  a.utt_id = "u1";
  a.corpus_id = "c";
  a.language = "en";
  a.speaker_id = "s1";
  a.path = "wav/u1.wav";
  a.split = Split::kVal;
  UtteranceRecord b = a;
  b.utt_id = "u1+A3-telephone";
  b.source_utt = "u1";
  b.augment = "A3:telephone";
  b.pseudo_domain = 3;
  b.path = "";
  UtteranceRecord c = b;
  c.utt_id = "u1+A1-noise+A5-mmse";
  c.augment = "A1:noise>A5:mmse";
  c.pseudo_domain.reset();
  m.rows = {a, b, c};
  auto dir = test::TempDir("manifest");
  WriteManifest(dir / "m.tsv", m);
  Manifest back = ReadManifest(dir / "m.tsv");
  REQUIRE(back.rows.size() == 3);
  CHECK(back.base_dir == dir);
  CHECK(back.rows[0].split == Split::kVal);
  CHECK(back.rows[0].IsOriginal());
  CHECK(back.rows[1].pseudo_domain == 3);
  CHECK(back.rows[1].source_utt == "u1");
  CHECK(!back.rows[2].pseudo_domain.has_value());
  CHECK(back.rows[2].augment == "A1:noise>A5:mmse");
  CHECK(back.ResolvePath(back.rows[0]) == dir / "wav/u1.wav");
  Manifest dup = m;
  dup.rows.push_back(a);
  CHECK_THROWS_AS(dup.Validate(), Error);
  CHECK_THROWS_AS(ReadManifest(dir / "none.tsv"), Error);
}

TEST_CASE("speaker-disjoint splits") {
  Manifest m;
  for (int s = 0; s < 10; ++s) {
    for (int u = 0; u < 3; ++u) {
      UtteranceRecord r;
      r.speaker_id = "s" + std::to_string(s);
      r.utt_id = r.speaker_id + "-" + std::to_string(u);
      r.corpus_id = "c";
      r.language = "x";
      m.rows.push_back(r);
    }
  }
  Manifest a = m, b = m;
  AssignSplits(&a, 0.2, 0.25, 9);
  AssignSplits(&b, 0.2, 0.25, 9);
  std::map<std::string, std::set<Split>> per_spk;
  std::map<Split, std::set<std::string>> spk;
  for (size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].split == b.rows[i].split);
    per_spk[a.rows[i].speaker_id].insert(a.rows[i].split);
    spk[a.rows[i].split].insert(a.rows[i].speaker_id);
  }
  for (const auto& [s, sp] : per_spk) CHECK(sp.size() == 1);
  CHECK(spk[Split::kTest].size() == 2);
  CHECK(spk[Split::kVal].size() == 2);
  CHECK(spk[Split::kTrain].size() == 6);
  Manifest one = m;
  for (auto& r : one.rows) r.speaker_id = "same";
  CHECK_THROWS_AS(AssignSplits(&one, 0.2, 0.2, 1), Error);
  CHECK_THROWS_AS(AssignSplits(&m, 1.0, 0.2, 1), Error);
}

TEST_CASE("synthetic corpus") {
  SynthOptions o;
  o.name = "tiny";
  o.num_languages = 3;
  o.speakers_per_language = 2;
  o.utts_per_speaker = 2;
  o.utt_seconds = 1.5;
  o.seed = 4;
  auto d1 = test::TempDir("synth1"), d2 = test::TempDir("synth2");
  Manifest m1 = SynthCorpus(o, d1), m2 = SynthCorpus(o, d2);
  REQUIRE(m1.rows.size() == 12);
  CHECK(m1.Languages().size() == 3);
  for (size_t i = 0; i < m1.rows.size(); ++i) {
    Waveform a = ReadWav(m1.ResolvePath(m1.rows[i]))[0];
    Waveform b = ReadWav(m2.ResolvePath(m2.rows[i]))[0];
    CHECK(a.sample_rate_hz == kCanonicalRateHz);
    CHECK(a.size() == 12000);
    CHECK(a.samples == b.samples);
    CHECK(test::Peak(a.samples) <= 1.0);
    CHECK(test::Peak(a.samples) > 0.01);
  }
  o.num_languages = 0;
  CHECK_THROWS_AS(o.Validate(), Error);
}

TEST_CASE("language recipes differ") {
  auto names = SynthLanguageNames(4);
  CHECK(std::set<std::string>(names.begin(), names.end()).size() == 4);
  LanguageRecipe a = MakeLanguageRecipe(names[0]), b = MakeLanguageRecipe(names[1]);
  CHECK(a.vowels != b.vowels);
  for (const auto& row : a.vowel_bigram) {
    double s = 0.0;
    for (double v : row) s += v;
    CHECK(s == doctest::Approx(1.0));
  }
}

TEST_CASE("corpus styles shape the spectrum") {
  LanguageRecipe r = MakeLanguageRecipe(SynthLanguageNames(1)[0]);
  std::vector<Waveform> studio, tel;
  for (int u = 0; u < 4; ++u) {
    Waveform w = SynthesizeUtterance(r, 11, 2.0, 100 + u);
    studio.push_back(ApplyCorpusStyle(w, CorpusStyle::kStudio, u));
    tel.push_back(ApplyCorpusStyle(w, CorpusStyle::kTelephone, u));
  }
  Ltas ls = ComputeLtas(studio), lt = ComputeLtas(tel);
  auto band = [](const Ltas& l, double lo, double hi) {
    double s = 0.0;
    int n = 0;
    for (size_t k = 0; k < l.db.size(); ++k) {
      if (l.BinHz(k) >= lo && l.BinHz(k) <= hi) {
        s += l.db[k];
        ++n;
      }
    }
    return s / n;
  };
  // Telephone loses the top band relative to its own mid band.
  double drop_s = band(ls, 500, 1500) - band(ls, 3600, 3950);
  double drop_t = band(lt, 500, 1500) - band(lt, 3600, 3950);
  CHECK(drop_t - drop_s >= 10.0);
  CHECK(ParseCorpusStyle("wild") == CorpusStyle::kWild);
  CHECK_THROWS_AS(ParseCorpusStyle("radio"), Error);
}

TEST_CASE("config parsing and rules") {
  ExperimentConfig c = ParseConfig(kBaseConfig);
  CHECK(c.seed == 3);
  REQUIRE(c.corpora.size() == 2);
  CHECK(c.train_corpora == std::vector<std::string>{"a", "b"});
  CHECK(c.Corpus("b").synth.style == CorpusStyle::kTelephone);
  CHECK_NOTHROW(c.Validate());
  // Snapshot round trip.
  ExperimentConfig d = ParseConfig(ConfigToString(c));
  CHECK(ConfigToString(d) == ConfigToString(c));

  std::string base = kBaseConfig;
  CHECK_THROWS_AS(ParseConfig(base + "[train]\nmax_epoch=3\n"), Error);
  CHECK_THROWS_AS(ParseConfig(base + "[experiment]\nsed=3\n"), Error);
  CHECK_THROWS_AS(ParseConfig("[experiment\nseed=1\n"), Error);
  CHECK_THROWS_AS(ParseConfig(base + "pool_training_corpora=true\n").Validate(), Error);
  CHECK_THROWS_AS(ParseConfig(base + "[dg]\nmode=mmd\n").Validate(), Error);
  CHECK_NOTHROW(ParseConfig(base + "[dg]\nmode=mmd\n[fold]\ngamma=1\n").Validate());
  CHECK_THROWS_AS(
      ParseConfig(base + "[dg]\nmode=mmd\ntarget_domains=b\n[fold]\ngamma=1\n").Validate(), Error);
  CHECK_THROWS_AS(ParseConfig(base + "train_corpora=zulu\n").Validate(), Error);
  CHECK_THROWS_AS(ParseConfig(base + "metrics=f1\n").Validate(), Error);
  CHECK_THROWS_AS(ParseConfig(base + "[dg]\nweights=heavy\n[fold]\ngamma=1\n").Validate(), Error);

  ExperimentConfig t = ParseConfig(base + "[dg]\nmode=md_mmd\nweights=reference\n[fold]\ngamma=1\n");
  REQUIRE(t.dg.md_weights.size() == 7);
  double s = 0.0;
  for (double w : t.dg.md_weights) s += w;
  CHECK(s == doctest::Approx(1.0));
  CHECK(t.dg.md_weights[0] == doctest::Approx(0.353 / 1.372));
}

TEST_CASE("item extraction") {
  SynthOptions o;
  o.name = "c";
  o.num_languages = 2;
  o.speakers_per_language = 2;
  o.utts_per_speaker = 1;
  o.utt_seconds = 6.5;
  o.seed = 8;
  auto dir = test::TempDir("items");
  Manifest m = SynthCorpus(o, dir);
  ExperimentConfig cfg = ParseConfig(kBaseConfig);
  std::vector<size_t> rows = {0, 1, 2, 3};
  std::vector<std::string> langs = m.Languages();
  std::vector<Item> items = ExtractItems(m, rows, langs, cfg);
  std::set<std::string> utts;
  for (const auto& it : items) {
    CHECK(it.feats.frames() == 298);
    CHECK(it.feats.dims() == cfg.features.num_ceps);
    CHECK((it.language >= 0 && it.language < 2));
    CHECK(it.domain == 0);
    utts.insert(it.id.substr(0, it.id.find('#')));
  }
  CHECK(utts.size() == 4);
  CHECK(items.size() >= 4);
  std::vector<Item> again = ExtractItems(m, rows, langs, cfg);
  REQUIRE(again.size() == items.size());
  CHECK(again[0].feats.data.isApprox(items[0].feats.data, 0.0));
}

TEST_CASE("cli") {
  std::string out, err;
  CHECK(Cli({}, &out, &err) != 0);
  CHECK(Cli({"bogus"}, &out, &err) != 0);
  CHECK(Cli({"--help"}, &out, &err) == 0);
  CHECK(out.find("cascade-plan") != std::string::npos);
  CHECK(Cli({"eval", "--scores", "/nonexistent/s.tsv"}, &out, &err) != 0);
  CHECK(err.find("/nonexistent/s.tsv") != std::string::npos);

  auto dir = test::TempDir("cli");
  {
    std::ofstream f(dir / "s.tsv");
    f << "u1\ta\t1\t2\nu1\tb\t0\t-1\nu2\ta\t0\t-2\nu2\tb\t1\t1\n";
  }
  REQUIRE(Cli({"eval", "--scores", (dir / "s.tsv").string(), "--metric", "all"}, &out, &err) == 0);
  CHECK(out.find("mean_eer\t0") != std::string::npos);
  CHECK(out.find("cavg\t0") != std::string::npos);

  {
    std::ofstream f(dir / "t9.tsv");
    f << "0\t.311\t.385\t.458\t.713\t.169\t.312\n"
      << ".313\t0\t.271\t.151\t.178\t.228\t.101\n"
      << ".518\t.332\t0\t.210\t.609\t.391\t.309\n"
      << ".341\t.155\t.191\t0\t.287\t.278\t.194\n"
      << ".529\t.173\t.532\t.329\t0\t.340\t.251\n"
      << ".187\t.191\t.296\t.311\t.393\t0\t.180\n"
      << ".257\t.104\t.280\t.174\t.210\t.195\t0\n";
  }
  REQUIRE(Cli({"cascade-plan", "--diversity", (dir / "t9.tsv").string()}, &out, &err) == 0);
  CHECK(out == "A1->A5\nA2->A1\nA3->A5\nA4->A1\nA5->A3\nA6->A5\nA7->A3\n");
  std::vector<std::vector<double>> bad = {{0, 1}, {1}};
  CHECK_THROWS_AS(CascadePlanFromMatrix(bad), Error);
}

}  // TEST_SUITE
