// src/harness/cli.cc

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

#include "lidwb/harness/cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "lidwb/augment.h"
#include "lidwb/diversity.h"
#include "lidwb/eval.h"
#include "lidwb/harness/config.h"
#include "lidwb/harness/experiment.h"
#include "lidwb/harness/pipeline.h"
#include "lidwb/harness/synth.h"
#include "lidwb/util/error.h"
#include "lidwb/util/parallel.h"
#include "lidwb/util/rng.h"

namespace lidwb::harness {
namespace fs = std::filesystem;

std::vector<std::vector<double>> ReadDelimitedMatrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open matrix file: " + path);
  std::vector<std::vector<double>> m;
  std::string line;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::replace(line.begin(), line.end(), '\t', ' ');
    std::istringstream ss(line);
    std::vector<double> row;
    for (std::string tok; ss >> tok;) {
      try {
        size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos == tok.size()) row.push_back(v);
      } catch (const std::exception&) {
      }
    }
    if (row.empty()) {
      if (!m.empty() && line.find_first_not_of(" ") == std::string::npos) break;
      continue;
    }
    m.push_back(row);
  }
  if (m.empty()) throw Error("no numeric rows in " + path);
  for (const auto& r : m) {
    if (r.size() != m.size()) throw Error("matrix in " + path + " is not square");
  }
  return m;
}

std::map<int, int> CascadePlanFromMatrix(const std::vector<std::vector<double>>& m) {
  if (m.size() == 8) {
    std::vector<std::vector<double>> sub(7, std::vector<double>(7));
    for (size_t i = 0; i < 7; ++i) {
      for (size_t j = 0; j < 7; ++j) sub[i][j] = m[i + 1][j + 1];
    }
    return diversity::PlanCascade(sub);
  }
  if (m.size() != 7) throw Error("cascade plan needs a 7x7 or 8x8 matrix");
  return diversity::PlanCascade(m);
}

namespace {

struct Common {
  uint64_t seed = 1;
  std::string config;
  std::string out;
};

void AddCommon(CLI::App* app, Common* c, bool out_required) {
  app->add_option("--seed", c->seed, "Experiment seed");
  app->add_option("--config", c->config, "Experiment config (INI)");
  auto* o = app->add_option("--out", c->out, "Output path");
  if (out_required) o->required();
}

ExperimentConfig ConfigFor(CLI::App* app, const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : LoadConfig(c.config);
  if (c.config.empty() || app->get_option("--seed")->count() > 0) cfg.seed = c.seed;
  return cfg;
}

Split SplitArg(const std::string& s) { return ParseSplit(s); }

std::vector<size_t> RowsOf(const Manifest& m, const std::string& split, bool originals) {
  std::vector<size_t> out;
  for (size_t i = 0; i < m.rows.size(); ++i) {
    if (originals && !m.rows[i].IsOriginal()) continue;
    if (split == "all" || m.rows[i].split == SplitArg(split)) out.push_back(i);
  }
  return out;
}

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lidwb: cross-corpus language identification toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // synth-corpus
  Common c_synth;
  SynthOptions so;
  std::string style = "studio";
  double test_fraction = 0.34;
  auto* synth = app.add_subcommand("synth-corpus", "Generate a synthetic multi-language corpus");
  AddCommon(synth, &c_synth, true);
  synth->add_option("--name", so.name);
  synth->add_option("--style", style)->check(CLI::IsMember({"studio", "telephone", "wild"}));
  synth->add_option("--languages", so.num_languages);
  synth->add_option("--speakers", so.speakers_per_language);
  synth->add_option("--utterances", so.utts_per_speaker);
  synth->add_option("--seconds", so.utt_seconds);
  synth->add_option("--test-fraction", test_fraction);

  // augment
  Common c_aug;
  std::string aug_manifest, scenario = "pooled", cascade_report;
  double gamma = 1.0;
  auto* aug = app.add_subcommand("augment", "Sample and render augmented copies");
  AddCommon(aug, &c_aug, true);
  aug->add_option("--manifest", aug_manifest)->required();
  aug->add_option("--gamma", gamma);
  aug->add_option("--scenario", scenario);
  aug->add_option("--cascade", cascade_report, "Diversity report whose plan cascades each copy");

  // cascade-plan
  Common c_plan;
  std::string plan_matrix;
  auto* plan = app.add_subcommand("cascade-plan", "Partner category per augmentation category");
  AddCommon(plan, &c_plan, false);
  plan->add_option("--diversity", plan_matrix)->required();

  // train
  Common c_train;
  std::string train_corpus;
  auto* train = app.add_subcommand("train", "Train one model on one corpus");
  AddCommon(train, &c_train, true);
  train->add_option("--corpus", train_corpus);

  // embed
  Common c_embed;
  std::string embed_model, embed_manifest, embed_split = "test";
  bool embed_pooled = false;
  auto* embed = app.add_subcommand("embed", "Extract utterance-chunk embeddings");
  AddCommon(embed, &c_embed, true);
  embed->add_option("--model", embed_model)->required();
  embed->add_option("--manifest", embed_manifest)->required();
  embed->add_option("--split", embed_split);
  embed->add_flag("--pooled", embed_pooled, "Encoder output instead of the embedding layer");

  // score
  Common c_score;
  std::string score_model, score_manifest, score_split = "test";
  auto* score = app.add_subcommand("score", "Score a manifest split with a model");
  AddCommon(score, &c_score, true);
  score->add_option("--model", score_model)->required();
  score->add_option("--manifest", score_manifest)->required();
  score->add_option("--split", score_split);

  // eval
  Common c_eval;
  std::string eval_scores, eval_metric = "eer";
  double eval_threshold = 0.0;
  auto* ev = app.add_subcommand("eval", "EER / Cavg of a score file");
  AddCommon(ev, &c_eval, false);
  ev->add_option("--scores", eval_scores)->required();
  ev->add_option("--metric", eval_metric)->check(CLI::IsMember({"eer", "cavg", "all"}));
  ev->add_option("--threshold", eval_threshold);

  // mismatch
  Common c_mm;
  std::string mm_metrics, mm_metric = "eer";
  auto* mm = app.add_subcommand("mismatch", "Cross-corpus mismatch matrix from metrics.tsv");
  AddCommon(mm, &c_mm, false);
  mm->add_option("--metrics", mm_metrics)->required();
  mm->add_option("--metric", mm_metric)->check(CLI::IsMember({"eer", "cavg"}));

  // det-plot
  Common c_det;
  std::vector<std::string> det_scores;
  std::string det_language;
  auto* det = app.add_subcommand("det-plot", "DET curve CSV and SVG");
  AddCommon(det, &c_det, true);
  det->add_option("--scores", det_scores)->required();
  det->add_option("--language", det_language, "Single language (default: pooled trials)");

  // diversity-report
  Common c_div;
  std::string div_model, div_manifest, div_split = "val";
  auto* div = app.add_subcommand("diversity-report", "Pseudo-domain divergences and plan");
  AddCommon(div, &c_div, true);
  div->add_option("--model", div_model)->required();
  div->add_option("--manifest", div_manifest)->required();
  div->add_option("--split", div_split);

  // run
  Common c_run;
  auto* run = app.add_subcommand("run", "Full cross-corpus experiment");
  AddCommon(run, &c_run, true);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (*synth) {
      if (!c_synth.config.empty()) {
        ExperimentConfig cfg = ConfigFor(synth, c_synth);
        ExperimentConfig local = cfg;
        local.data_dir = c_synth.out;
        std::vector<Manifest> ms = PrepareCorpora(local, c_synth.out);
        for (size_t k = 0; k < ms.size(); ++k) {
          WriteManifest(fs::path(c_synth.out) / cfg.corpora[k].name / "manifest.tsv", ms[k]);
          out << cfg.corpora[k].name << "\t" << ms[k].rows.size() << " utterances\n";
        }
        return 0;
      }
      so.style = ParseCorpusStyle(style);
      so.seed = c_synth.seed;
      Manifest m = SynthCorpus(so, c_synth.out);
      AssignSplits(&m, test_fraction, 0.2, DeriveSeed(c_synth.seed, {"split"}));
      WriteManifest(fs::path(c_synth.out) / "manifest.tsv", m);
      out << m.rows.size() << " utterances written to " << c_synth.out << "\n";
      return 0;
    }
    if (*aug) {
      ExperimentConfig cfg = ConfigFor(aug, c_aug);
      Manifest m = ReadManifest(aug_manifest);
      augment::FoldConfig fc{gamma, augment::ParseFoldScenario(scenario)};
      Manifest train;
      train.base_dir = m.base_dir;
      for (const auto& r : m.rows) {
        if (r.split == Split::kTrain && r.IsOriginal()) train.rows.push_back(r);
      }
      Manifest f = augment::SampleFold(train, fc, cfg.seed);
      std::map<int, int> plan;
      if (!cascade_report.empty()) plan = diversity::ReadCascadePlan(cascade_report);
      const fs::path outdir = c_aug.out;
      fs::create_directories(outdir / "wav");
      Manifest result;
      result.base_dir = outdir;
      for (auto r : f.rows) {
        if (r.IsOriginal()) {
          r.path = fs::absolute(m.ResolvePath(r)).string();
          result.rows.push_back(r);
          continue;
        }
        if (!plan.empty()) {
          augment::AugCategory first = augment::AugCategory::Parse(r.augment);
          int partner = plan.at(first.id);
          const auto& subs = augment::SubCategories(partner);
          Rng rng(DeriveSeed(cfg.seed, {"cascade", r.utt_id}));
          augment::AugCategory second{partner,
                                      subs[UniformInt(rng, 0, static_cast<int>(subs.size()) - 1)]};
          r.augment = first.Tag() + ">" + second.Tag();
          r.utt_id += "+A" + std::to_string(partner) + "-" + second.sub;
          r.pseudo_domain.reset();
        }
        result.rows.push_back(r);
      }
      // render augmented copies
      std::vector<size_t> todo;
      for (size_t i = 0; i < result.rows.size(); ++i) {
        if (!result.rows[i].IsOriginal()) todo.push_back(i);
      }
      ParallelFor(todo.size(), [&](size_t k) {
        UtteranceRecord& r = result.rows[todo[k]];
        UtteranceRecord src;
        for (const auto& o : result.rows) {
          if (o.utt_id == r.source_utt) src = o;
        }
        Waveform w = LoadRowWaveform(result, src, cfg.seed, cfg.augment);
        w = augment::ApplyRecipe(w, r.augment, augment::AugmentSeed(cfg.seed, r.utt_id, r.augment),
                                 cfg.augment);
        std::string file = r.utt_id;
        std::replace(file.begin(), file.end(), ':', '_');
        std::replace(file.begin(), file.end(), '>', '_');
        r.path = "wav/" + file + ".wav";
        WriteWav(outdir / r.path, w);
      });
      WriteManifest(outdir / "manifest.tsv", result);
      out << result.rows.size() << " rows (" << todo.size() << " augmented) written to "
          << (outdir / "manifest.tsv").string() << "\n";
      return 0;
    }
    if (*plan) {
      std::map<int, int> p = CascadePlanFromMatrix(ReadDelimitedMatrix(plan_matrix));
      std::ostringstream s;
      for (const auto& [i, j] : p) s << "A" << i << "->A" << j << "\n";
      out << s.str();
      if (!c_plan.out.empty()) {
        std::ofstream f(c_plan.out);
        if (!f) throw Error("cannot write " + c_plan.out);
        for (const auto& [i, j] : p) f << "plan.A" << i << "=A" << j << "\n";
      }
      return 0;
    }
    if (*train) {
      ExperimentConfig cfg = ConfigFor(train, c_train);
      if (!train_corpus.empty()) cfg.train_corpora = {train_corpus};
      if (cfg.train_corpora.size() != 1) {
        throw Error("train: choose one corpus with --corpus");
      }
      cfg.Validate();
      const fs::path dir = c_train.out;
      fs::create_directories(dir);
      SaveConfig(dir / "config.snapshot", cfg);
      std::vector<Manifest> cs = PrepareCorpora(cfg, dir);
      std::vector<std::string> langs = ClosedLanguageSet(cs);
      const std::string tc = cfg.train_corpora[0];
      size_t ci = 0;
      while (cfg.corpora[ci].name != tc) ++ci;
      Manifest tm;
      tm.base_dir = cs[ci].base_dir;
      for (size_t i : SelectRows(cs[ci], tc, Split::kTrain, true)) tm.rows.push_back(cs[ci].rows[i]);
      if (cfg.fold.gamma > 0.0) {
        tm = augment::SampleFold(tm, cfg.fold, DeriveSeed(cfg.seed, {"fold", tc}));
      }
      std::vector<size_t> all(tm.rows.size());
      for (size_t i = 0; i < all.size(); ++i) all[i] = i;
      std::vector<Item> tr = ExtractItems(tm, all, langs, cfg);
      std::vector<Item> va = ExtractItems(cs[ci], SelectRows(cs[ci], tc, Split::kVal, true), langs, cfg);
      TrainedModel model = TrainLidModel(tr, va, langs, cfg, DeriveSeed(cfg.seed, {"model", tc}), &out);
      SaveModel(dir / "model.ckpt", model);
      out << "model written to " << (dir / "model.ckpt").string() << "\n";
      return 0;
    }
    if (*embed || *score) {
      const bool is_embed = static_cast<bool>(*embed);
      Common& c = is_embed ? c_embed : c_score;
      ExperimentConfig cfg = ConfigFor(is_embed ? embed : score, c);
      TrainedModel model = LoadModel(is_embed ? embed_model : score_model);
      Manifest m = ReadManifest(is_embed ? embed_manifest : score_manifest);
      std::vector<Item> items =
          ExtractItems(m, RowsOf(m, is_embed ? embed_split : score_split, false), model.languages, cfg);
      if (is_embed) {
        std::vector<std::vector<double>> e = EmbedItems(*model.model, items, embed_pooled);
        if (fs::path(c.out).has_parent_path()) fs::create_directories(fs::path(c.out).parent_path());
        std::ofstream f(c.out);
        if (!f) throw Error("cannot write " + c.out);
        f << std::setprecision(9);
        for (size_t i = 0; i < items.size(); ++i) {
          f << items[i].id;
          for (double v : e[i]) f << "\t" << v;
          f << "\n";
        }
        out << items.size() << " embeddings written to " << c.out << "\n";
      } else {
        eval::ScoreSet s = ScoreItems(*model.model, items, model.languages);
        if (cfg.utterance_scoring) s = eval::AverageByUtterance(s);
        eval::WriteScores(c.out, s);
        out << s.trials.size() << " trials written to " << c.out << "\n";
      }
      return 0;
    }
    if (*ev) {
      eval::ScoreSet s = eval::ReadScores(eval_scores);
      if (eval_metric == "eer" || eval_metric == "all") out << "mean_eer\t" << Fmt(eval::MeanEer(s)) << "\n";
      if (eval_metric == "cavg" || eval_metric == "all") {
        out << "cavg\t" << Fmt(eval::Cavg(s, 0.5, eval_threshold)) << "\n";
      }
      return 0;
    }
    if (*mm) {
      std::ifstream in(mm_metrics);
      if (!in) throw Error("cannot open metrics file: " + mm_metrics);
      std::map<std::pair<std::string, std::string>, double> grid;
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string a, b;
        double e = 0, cv = 0;
        if (!(ss >> a >> b >> e >> cv)) continue;
        grid[{a, b}] = mm_metric == "eer" ? e : cv;
      }
      eval::MismatchMatrix m = eval::ComputeMismatch(grid, mm_metric);
      if (!c_mm.out.empty()) eval::WriteMismatch(c_mm.out, m);
      out << mm_metric;
      for (const auto& n : m.corpora) out << "\t" << n;
      out << "\n";
      for (size_t i = 0; i < m.corpora.size(); ++i) {
        out << m.corpora[i];
        for (double v : m.d[i]) out << "\t" << Fmt(v);
        out << "\n";
      }
      return 0;
    }
    if (*det) {
      std::vector<std::pair<std::string, std::vector<eval::DetPoint>>> curves;
      for (const auto& path : det_scores) {
        eval::ScoreSet s = eval::ReadScores(path);
        std::vector<eval::DetPoint> pts;
        if (det_language.empty()) {
          std::vector<double> tar, non;
          for (const auto& t : s.trials) (t.is_target ? tar : non).push_back(t.score);
          pts = eval::DetPointsFromScores(tar, non);
        } else {
          pts = eval::DetPoints(s, det_language);
        }
        curves.emplace_back(fs::path(path).stem().string(), pts);
      }
      fs::path svg = c_det.out;
      eval::WriteDetSvg(svg, curves);
      fs::path csv = svg;
      csv.replace_extension(".csv");
      eval::WriteDetCsv(csv, curves[0].second);
      out << "DET plot written to " << svg.string() << "\n";
      return 0;
    }
    if (*div) {
      ExperimentConfig cfg = ConfigFor(div, c_div);
      TrainedModel model = LoadModel(div_model);
      Manifest m = ReadManifest(div_manifest);
      diversity::DiversityReport r =
          DiversityFromModel(*model.model, m, RowsOf(m, div_split, true), model.languages, cfg);
      diversity::WriteDiversityReport(c_div.out, r);
      for (const auto& [i, j] : r.plan) out << "A" << i << "->A" << j << "\n";
      return 0;
    }
    if (*run) {
      ExperimentConfig cfg = ConfigFor(run, c_run);
      RunResult r = RunExperiment(cfg, c_run.out, &out);
      for (const auto& m : r.mismatch) {
        out << "mismatch (" << m.metric << ")\n";
        for (size_t i = 0; i < m.corpora.size(); ++i) {
          out << "  " << m.corpora[i];
          for (double v : m.d[i]) out << "\t" << Fmt(v);
          out << "\n";
        }
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace lidwb::harness
