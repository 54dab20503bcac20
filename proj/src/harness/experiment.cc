// src/harness/experiment.cc

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

#include "lidwb/harness/experiment.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "lidwb/augment.h"
#include "lidwb/dg.h"
#include "lidwb/harness/pipeline.h"
#include "lidwb/harness/synth.h"
#include "lidwb/util/error.h"
#include "lidwb/util/rng.h"

namespace lidwb::harness {
namespace fs = std::filesystem;

const ModelResult& RunResult::Model(const std::string& train_corpus) const {
  for (const auto& m : models) {
    if (m.train_corpus == train_corpus) return m;
  }
  throw Error("no model trained on " + train_corpus);
}

double RunResult::CrossCorpusMeanEer(const std::string& train_corpus) const {
  const ModelResult& m = Model(train_corpus);
  double s = 0.0;
  int n = 0;
  for (const auto& [test, v] : m.eer) {
    if (test == train_corpus) continue;
    s += v;
    ++n;
  }
  if (n == 0) throw Error("no cross-corpus result for " + train_corpus);
  return s / n;
}

namespace {

std::string SynthStamp(const SynthOptions& o) {
  std::ostringstream s;
  s << o.name << " " << o.num_languages << " " << o.speakers_per_language << " "
    << o.utts_per_speaker << " " << o.utt_seconds << " " << CorpusStyleName(o.style) << " "
    << o.seed << "\n";
  return s.str();
}

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Keeps chunks of the full configured length.
std::vector<Item> FullLength(std::vector<Item> items, const ExperimentConfig& cfg) {
  const size_t frames = NumFrames(
      static_cast<size_t>(cfg.chunk_seconds * kCanonicalRateHz), kCanonicalRateHz, cfg.features);
  items.erase(std::remove_if(items.begin(), items.end(),
                             [&](const Item& it) {
                               return static_cast<size_t>(it.feats.frames()) != frames;
                             }),
              items.end());
  return items;
}

Manifest Subset(const Manifest& m, const std::vector<size_t>& rows) {
  Manifest out;
  out.base_dir = m.base_dir;
  for (size_t i : rows) out.rows.push_back(m.rows[i]);
  return out;
}

std::vector<size_t> AllRows(const Manifest& m) {
  std::vector<size_t> v(m.rows.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

void WriteHistory(const fs::path& path, const nn::TrainHistory& h) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch\ttrain_loss\tval_loss\tlearning_rate\n";
  char buf[160];
  for (const auto& e : h.epochs) {
    std::snprintf(buf, sizeof(buf), "%d\t%.9g\t%.9g\t%.9g\n", e.epoch, e.train_loss, e.val_loss,
                  e.learning_rate);
    out << buf;
  }
  out << "# best_epoch=" << h.best_epoch << " early_stopped=" << (h.early_stopped ? 1 : 0)
      << "\n";
}

std::vector<double> WeightsFromDkl(const std::vector<double>& dkl) {
  std::map<int, nn::Real> m;
  for (size_t k = 0; k < dkl.size(); ++k) m[static_cast<int>(k) + 1] = dkl[k];
  std::map<int, nn::Real> w = dg::DiversityWeights(m);
  std::vector<double> out;
  for (const auto& [k, v] : w) out.push_back(v);
  return out;
}

}  // namespace

std::vector<Manifest> PrepareCorpora(const ExperimentConfig& cfg, const fs::path& run_dir) {
  const fs::path data_dir = cfg.data_dir.empty() ? run_dir / "data" : fs::path(cfg.data_dir);
  std::vector<Manifest> out;
  for (const auto& cc : cfg.corpora) {
    Manifest m;
    if (!cc.manifest.empty()) {
      Manifest all = ReadManifest(cc.manifest);
      m.base_dir = all.base_dir;
      bool any_split = false;
      for (const auto& r : all.rows) {
        if (r.corpus_id != cc.name) continue;
        m.rows.push_back(r);
        any_split = any_split || r.split != Split::kTrain;
      }
      if (m.rows.empty()) throw Error("manifest " + cc.manifest + " has no rows for " + cc.name);
      if (!any_split) {
        AssignSplits(&m, cfg.test_fraction, cfg.val_fraction, DeriveSeed(cfg.seed, {"split"}));
      }
    } else {
      const fs::path dir = data_dir / cc.name;
      const std::string stamp = SynthStamp(cc.synth);
      if (fs::exists(dir / "manifest.tsv") && fs::exists(dir / "synth.stamp") &&
          ReadAll(dir / "synth.stamp") == stamp) {
        m = ReadManifest(dir / "manifest.tsv");
      } else {
        m = SynthCorpus(cc.synth, dir);
        std::ofstream(dir / "synth.stamp") << stamp;
      }
      AssignSplits(&m, cfg.test_fraction, cfg.val_fraction, DeriveSeed(cfg.seed, {"split"}));
    }
    m.Validate();
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<std::string> ClosedLanguageSet(const std::vector<Manifest>& corpora) {
  std::set<std::string> all;
  for (const auto& m : corpora) {
    for (const auto& l : m.Languages()) all.insert(l);
  }
  for (const auto& m : corpora) {
    if (m.Languages().size() != all.size()) {
      throw Error("corpus " + (m.rows.empty() ? std::string("?") : m.rows[0].corpus_id) +
                  " does not cover the closed language set");
    }
  }
  return {all.begin(), all.end()};
}

diversity::DiversityReport DiversityFromModel(const nn::LidModel& model, const Manifest& m,
                                              const std::vector<size_t>& rows,
                                              const std::vector<std::string>& languages,
                                              const ExperimentConfig& cfg) {
  Manifest bal = BalancedDomainManifest(m, rows, DeriveSeed(cfg.seed, {"diversity"}));
  std::vector<Item> items = ExtractItems(bal, AllRows(bal), languages, cfg);
  std::vector<std::vector<double>> emb = EmbedItems(model, items);
  std::vector<std::vector<std::vector<double>>> by(dg::kNumPseudoDomains);
  for (size_t i = 0; i < items.size(); ++i) by.at(items[i].domain).push_back(emb[i]);
  return diversity::ComputeDiversityReport(by);
}

std::vector<double> ReadDklRow(const fs::path& report) {
  std::ifstream in(report);
  if (!in) throw Error("cannot open diversity report: " + report.string());
  std::vector<double> row(dg::kNumPseudoDomains - 1, -1.0);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("dkl0.A", 0) != 0) continue;
    size_t eq = line.find('=');
    int k = std::stoi(line.substr(6, eq - 6));
    if (k >= 1 && k < dg::kNumPseudoDomains) row[k - 1] = std::stod(line.substr(eq + 1));
  }
  for (double v : row) {
    if (v < 0.0) throw Error("incomplete D_KL row in " + report.string());
  }
  return row;
}

RunResult RunExperiment(const ExperimentConfig& cfg_in, const fs::path& run_dir,
                        std::ostream* log) {
  ExperimentConfig cfg = cfg_in;
  cfg.Validate();
  fs::create_directories(run_dir);
  SaveConfig(run_dir / "config.snapshot", cfg);

  std::vector<Manifest> corpora = PrepareCorpora(cfg, run_dir);
  RunResult result;
  result.languages = ClosedLanguageSet(corpora);
  const auto& langs = result.languages;

  // test chunks per corpus, shared by all models
  std::map<std::string, std::vector<Item>> test_items;
  for (size_t c = 0; c < corpora.size(); ++c) {
    const std::string& name = cfg.corpora[c].name;
    test_items[name] =
        ExtractItems(corpora[c], SelectRows(corpora[c], name, Split::kTest, true), langs, cfg);
    if (test_items[name].empty()) throw Error("corpus " + name + " has no test chunks");
  }

  std::map<std::pair<std::string, std::string>, double> grid_eer, grid_cavg;
  for (const std::string& tc : cfg.train_corpora) {
    const size_t ci = static_cast<size_t>(
        std::find_if(cfg.corpora.begin(), cfg.corpora.end(),
                     [&](const CorpusConfig& c) { return c.name == tc; }) -
        cfg.corpora.begin());
    const Manifest& corpus = corpora[ci];
    const fs::path dir = run_dir / ("train-" + tc);
    fs::create_directories(dir / "scores");
    if (log) *log << "[" << cfg.name << "] training on " << tc << std::endl;

    std::vector<size_t> train_rows = SelectRows(corpus, tc, Split::kTrain, true);
    std::vector<size_t> val_rows = SelectRows(corpus, tc, Split::kVal, true);
    Manifest train_m = Subset(corpus, train_rows);
    if (cfg.fold.gamma > 0.0) {
      train_m = augment::SampleFold(train_m, cfg.fold, DeriveSeed(cfg.seed, {"fold", tc}));
    }
    WriteManifest(dir / "train_manifest.tsv", train_m);
    std::vector<Item> train = FullLength(ExtractItems(train_m, AllRows(train_m), langs, cfg), cfg);
    std::vector<Item> val = FullLength(ExtractItems(corpus, val_rows, langs, cfg), cfg);
    if (log) {
      *log << "  " << train.size() << " training chunks, " << val.size() << " validation chunks"
           << std::endl;
    }

    ExperimentConfig run_cfg = cfg;
    if (cfg.dg.mode == dg::DgMode::kMdMmd && cfg.md_weight_source == "computed") {
      ExperimentConfig boot = cfg;
      boot.dg.mode = dg::DgMode::kNone;
      TrainedModel b =
          TrainLidModel(train, val, langs, boot, DeriveSeed(cfg.seed, {"bootstrap", tc}), log);
      diversity::DiversityReport rep = DiversityFromModel(*b.model, corpus, val_rows, langs, cfg);
      diversity::WriteDiversityReport(dir / "diversity_bootstrap.txt", rep);
      run_cfg.dg.md_weights = WeightsFromDkl(rep.kl_from_original);
    } else if (cfg.dg.mode == dg::DgMode::kMdMmd &&
               cfg.md_weight_source.rfind("file:", 0) == 0) {
      run_cfg.dg.md_weights = WeightsFromDkl(ReadDklRow(cfg.md_weight_source.substr(5)));
    }

    TrainedModel tm =
        TrainLidModel(train, val, langs, run_cfg, DeriveSeed(cfg.seed, {"model", tc}), log);
    WriteHistory(dir / "history.tsv", tm.history);
    SaveModel(dir / "model.ckpt", tm);
    // score with the stored (float32) weights so CLI re-scoring agrees
    TrainedModel loaded = LoadModel(dir / "model.ckpt");

    ModelResult mr;
    mr.train_corpus = tc;
    mr.history = tm.history;
    for (const auto& cc : cfg.corpora) {
      eval::ScoreSet s = ScoreItems(*loaded.model, test_items.at(cc.name), langs);
      if (cfg.utterance_scoring) s = eval::AverageByUtterance(s);
      eval::WriteScores(dir / "scores" / (cc.name + ".tsv"), s);
      mr.eer[cc.name] = eval::MeanEer(s);
      mr.cavg[cc.name] = eval::Cavg(s);
      grid_eer[{tc, cc.name}] = mr.eer[cc.name];
      grid_cavg[{tc, cc.name}] = mr.cavg[cc.name];
      if (log) {
        *log << "  test " << cc.name << ": EER " << mr.eer[cc.name] << ", Cavg "
             << mr.cavg[cc.name] << std::endl;
      }
    }
    if (cfg.domain_probe) {
      Manifest ptr = BalancedDomainManifest(corpus, train_rows, DeriveSeed(cfg.seed, {"probe"}));
      Manifest pte = BalancedDomainManifest(corpus, val_rows, DeriveSeed(cfg.seed, {"probe"}));
      std::vector<Item> a = ExtractItems(ptr, AllRows(ptr), langs, cfg);
      std::vector<Item> b = ExtractItems(pte, AllRows(pte), langs, cfg);
      mr.probe_accuracy = DomainProbeAccuracy(*loaded.model, a, b, cfg.probe_input == "pooled",
                                              DeriveSeed(cfg.seed, {"probe-fit", tc}));
      std::ofstream(dir / "probe.tsv") << "input\taccuracy\tchance\n"
                                        << cfg.probe_input << "\t" << *mr.probe_accuracy << "\t"
                                        << 1.0 / dg::kNumPseudoDomains << "\n";
      if (log) *log << "  domain probe accuracy " << *mr.probe_accuracy << std::endl;
    }
    if (cfg.diversity_report) {
      mr.diversity = DiversityFromModel(*loaded.model, corpus, val_rows, langs, cfg);
      diversity::WriteDiversityReport(dir / "diversity.txt", *mr.diversity);
    }
    result.models.push_back(std::move(mr));
  }

  {
    std::ofstream out(run_dir / "metrics.tsv");
    if (!out) throw Error("cannot write metrics.tsv");
    out << "train\ttest\teer\tcavg\n";
    char buf[256];
    for (const auto& m : result.models) {
      for (const auto& [test, e] : m.eer) {
        std::snprintf(buf, sizeof(buf), "%s\t%s\t%.6f\t%.6f\n", m.train_corpus.c_str(),
                      test.c_str(), e, m.cavg.at(test));
        out << buf;
      }
    }
  }
  for (const auto& metric : cfg.metrics) {
    result.mismatch.push_back(
        eval::ComputeMismatch(metric == "eer" ? grid_eer : grid_cavg, metric));
  }
  eval::WriteMismatch(run_dir / "mismatch.tsv", result.mismatch);
  return result;
}

}  // namespace lidwb::harness
