// src/harness/config.cc

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

#include "lidwb/harness/config.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lidwb/util/error.h"

namespace lidwb::harness {
namespace pt = boost::property_tree;
namespace {

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur.erase(0, cur.find_first_not_of(" \t"));
    cur.erase(cur.find_last_not_of(" \t") + 1);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::string JoinList(const std::vector<std::string>& v) {
  std::string s;
  for (size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + v[k];
  return s;
}

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Bool(bool b) { return b ? "true" : "false"; }

bool ParseBool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error("config: bad boolean '" + s + "'");
}

// Typed readers that leave the default alone when the key is absent.
struct Section {
  const pt::ptree* tree = nullptr;
  std::string name;
  std::set<std::string>* seen = nullptr;

  std::optional<std::string> Get(const std::string& key) const {
    if (tree == nullptr) return std::nullopt;
    auto v = tree->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    seen->insert(name + "/" + key);
    return *v;
  }
  void Str(const std::string& key, std::string* out) const {
    if (auto v = Get(key)) *out = *v;
  }
  template <typename T>
  void Number(const std::string& key, T* out) const {
    if (auto v = Get(key)) {
      try {
        size_t pos = 0;
        double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        *out = static_cast<T>(d);
        if constexpr (std::is_integral_v<T>) {
          if (static_cast<double>(*out) != d) throw std::invalid_argument("not integral");
        }
      } catch (const std::exception&) {
        throw Error("config: bad number for " + name + "." + key + ": '" + *v + "'");
      }
    }
  }
  void Seed(const std::string& key, uint64_t* out) const {
    if (auto v = Get(key)) {
      try {
        *out = std::stoull(*v);
      } catch (const std::exception&) {
        throw Error("config: bad seed '" + *v + "'");
      }
    }
  }
  void Flag(const std::string& key, bool* out) const {
    if (auto v = Get(key)) *out = ParseBool(*v);
  }
  void List(const std::string& key, std::vector<std::string>* out) const {
    if (auto v = Get(key)) *out = SplitList(*v);
  }
};

Section Sec(const pt::ptree& root, const std::string& name, std::set<std::string>* seen) {
  auto child = root.get_child_optional(pt::ptree::path_type(name, '\0'));
  return Section{child ? &*child : nullptr, name, seen};
}

}  // namespace

const CorpusConfig& ExperimentConfig::Corpus(const std::string& n) const {
  for (const auto& c : corpora) {
    if (c.name == n) return c;
  }
  throw Error("config: unknown corpus '" + n + "'");
}

void ExperimentConfig::Validate() const {
  if (corpora.empty()) throw Error("config: no corpora");
  std::set<std::string> names;
  for (const auto& c : corpora) {
    if (!names.insert(c.name).second) throw Error("config: duplicate corpus " + c.name);
  }
  if (pool_training_corpora) {
    throw Error("config: each model must be trained on a single corpus (pooling rejected)");
  }
  if (train_corpora.empty()) throw Error("config: no training corpus");
  std::set<std::string> tc;
  for (const auto& t : train_corpora) {
    Corpus(t);
    if (!tc.insert(t).second) throw Error("config: training corpus listed twice: " + t);
  }
  for (const auto& d : dg_target_domains) {
    if (d == "pseudo") continue;
    if (names.count(d)) {
      throw Error("config: corpus '" + d +
                  "' used as a target domain; held-out corpora must not feed training");
    }
    throw Error("config: unknown target domain source '" + d + "'");
  }
  for (const auto& m : metrics) {
    if (m != "eer" && m != "cavg") throw Error("config: unknown metric " + m);
  }
  if (probe_input != "embedding" && probe_input != "pooled") {
    throw Error("config: probe_input must be embedding or pooled");
  }
  if (!(chunk_seconds > 0.0)) throw Error("config: chunk_seconds must be positive");
  if (md_weight_source != "uniform" && md_weight_source != "reference" &&
      md_weight_source != "computed" && md_weight_source.rfind("file:", 0) != 0) {
    throw Error("config: bad dg.weights '" + md_weight_source + "'");
  }
  if (fold.gamma < 0.0) throw Error("config: fold.gamma must be >= 0");
  if (dg.mode != dg::DgMode::kNone && fold.gamma <= 0.0) {
    throw Error("config: domain generalization needs augmented data (fold.gamma > 0)");
  }
  if (dg.num_kernels < 1) throw Error("config: dg.kernels must be >= 1");
  if (dg.mode == dg::DgMode::kAdversarial && dg.lambda.cap > 1.0) {
    throw Error("config: adversarial lambda must stay within [0, 1]");
  }
}

ExperimentConfig ParseConfig(const std::string& text) {
  pt::ptree root;
  std::istringstream in(text);
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(std::string("config: ") + e.what());
  }
  std::set<std::string> seen;
  ExperimentConfig c;

  Section ex = Sec(root, "experiment", &seen);
  ex.Str("name", &c.name);
  ex.Seed("seed", &c.seed);
  ex.List("train_corpora", &c.train_corpora);
  ex.Flag("pool_training_corpora", &c.pool_training_corpora);
  ex.List("metrics", &c.metrics);
  ex.Number("test_fraction", &c.test_fraction);
  ex.Number("val_fraction", &c.val_fraction);
  ex.Number("chunk_seconds", &c.chunk_seconds);
  ex.Flag("utterance_scoring", &c.utterance_scoring);
  ex.Flag("diversity_report", &c.diversity_report);
  ex.Flag("domain_probe", &c.domain_probe);
  ex.Str("probe_input", &c.probe_input);
  ex.Str("data_dir", &c.data_dir);

  for (const auto& [key, child] : root) {
    if (key.rfind("corpus:", 0) != 0) continue;
    CorpusConfig cc;
    cc.name = key.substr(7);
    cc.synth.name = cc.name;
    Section s = Sec(root, key, &seen);
    s.Str("manifest", &cc.manifest);
    std::string style = CorpusStyleName(cc.synth.style);
    s.Str("style", &style);
    cc.synth.style = ParseCorpusStyle(style);
    s.Number("languages", &cc.synth.num_languages);
    s.Number("speakers", &cc.synth.speakers_per_language);
    s.Number("utterances", &cc.synth.utts_per_speaker);
    s.Number("seconds", &cc.synth.utt_seconds);
    cc.synth.seed = MixSeed(c.seed, HashString(cc.name));
    s.Seed("seed", &cc.synth.seed);
    c.corpora.push_back(cc);
  }

  Section md = Sec(root, "model", &seen);
  std::string family = nn::ModelFamilyName(c.model.family);
  md.Str("family", &family);
  std::string preset = "desk";
  md.Str("preset", &preset);
  if (preset == "full") {
    c.model = nn::ModelConfig::FullScale(nn::ParseModelFamily(family), c.model.input_dim,
                                          c.model.num_languages);
  } else if (preset != "desk") {
    throw Error("config: model.preset must be desk or full");
  }
  c.model.family = nn::ParseModelFamily(family);
  md.Number("input_dim", &c.model.input_dim);
  md.Number("channels", &c.model.channels);
  md.Number("embedding_dim", &c.model.embedding_dim);
  md.Number("xvector_stats_dim", &c.model.xvector_stats_dim);
  md.Number("xvector_segment_dim", &c.model.xvector_segment_dim);
  md.Number("first_kernel", &c.model.first_kernel);
  md.Number("res2_scale", &c.model.res2_scale);
  md.Number("se_ratio", &c.model.se_ratio);
  md.Number("attention_dim", &c.model.attention_dim);
  if (auto v = md.Get("dilations")) {
    c.model.dilations.clear();
    for (const auto& d : SplitList(*v)) c.model.dilations.push_back(std::stoi(d));
  }
  md.Number("dropout", &c.model.dropout);
  md.Number("am_scale", &c.model.am.scale);
  md.Number("am_margin", &c.model.am.margin);

  Section tr = Sec(root, "train", &seen);
  tr.Number("batch_size", &c.train.batch_size);
  tr.Number("learning_rate", &c.train.learning_rate);
  tr.Number("weight_decay", &c.train.weight_decay);
  tr.Number("max_epochs", &c.train.max_epochs);
  tr.Number("early_stop_patience", &c.train.early_stop_patience);
  tr.Number("plateau_factor", &c.train.plateau_factor);
  tr.Number("plateau_patience", &c.train.plateau_patience);
  tr.Number("min_learning_rate", &c.train.min_learning_rate);
  tr.Flag("restore_best", &c.train.restore_best);
  tr.Flag("spec_aug", &c.spec_aug);
  tr.Flag("mixup", &c.mixup);
  tr.Number("mixup_alpha", &c.mixup_alpha);

  Section dgs = Sec(root, "dg", &seen);
  std::string mode = dg::DgModeName(c.dg.mode);
  dgs.Str("mode", &mode);
  c.dg.mode = dg::ParseDgMode(mode);
  c.dg.lambda = dg::LambdaSchedule::Default(c.dg.mode);
  dgs.Number("lambda_initial", &c.dg.lambda.initial);
  dgs.Number("lambda_hold_epochs", &c.dg.lambda.hold_epochs);
  dgs.Number("lambda_increment", &c.dg.lambda.increment);
  dgs.Number("lambda_cap", &c.dg.lambda.cap);
  dgs.Number("kernels", &c.dg.num_kernels);
  dgs.Str("weights", &c.md_weight_source);
  dgs.List("target_domains", &c.dg_target_domains);

  Section fo = Sec(root, "fold", &seen);
  fo.Number("gamma", &c.fold.gamma);
  std::string scen = augment::FoldScenarioName(c.fold.scenario);
  fo.Str("scenario", &scen);
  c.fold.scenario = augment::ParseFoldScenario(scen);

  Section au = Sec(root, "augment", &seen);
  au.Number("snr_min_db", &c.augment.snr_min_db);
  au.Number("snr_max_db", &c.augment.snr_max_db);
  for (const char* bank : {"noise", "babble", "music", "rir"}) {
    std::vector<std::string> files;
    au.List(std::string("bank_") + bank, &files);
    if (!files.empty()) c.augment.banks[bank] = files;
  }
  for (const char* codec : {"aac", "gsm", "mp3", "ogg", "opus", "wma"}) {
    std::string cmd;
    au.Str(std::string("encoder_") + codec, &cmd);
    if (!cmd.empty()) c.augment.lossy_encoders[codec] = cmd;
  }

  Section fe = Sec(root, "features", &seen);
  fe.Number("num_filters", &c.features.num_filters);
  fe.Number("num_ceps", &c.features.num_ceps);
  fe.Number("frame_ms", &c.features.frame_ms);
  fe.Number("hop_ms", &c.features.hop_ms);
  fe.Number("log_floor", &c.features.log_floor);

  // Unknown keys are almost always typos.
  for (const auto& [sec, child] : root) {
    for (const auto& [key, val] : child) {
      if (!seen.count(sec + "/" + key)) throw Error("config: unknown key " + sec + "." + key);
    }
  }
  c.model.input_dim = c.features.num_ceps;
  if (c.train_corpora.empty()) {
    for (const auto& cc : c.corpora) c.train_corpora.push_back(cc.name);
  }
  if (c.md_weight_source == "uniform") {
    c.dg.md_weights.assign(dg::kNumPseudoDomains - 1, 1.0 / (dg::kNumPseudoDomains - 1));
  } else if (c.md_weight_source == "reference") {
    std::vector<double> row = ReferenceDklRow();
    double s = 0.0;
    for (double v : row) s += v;
    c.dg.md_weights.clear();
    for (double v : row) c.dg.md_weights.push_back(v / s);
  }
  return c;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string ConfigToString(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[experiment]\n"
    << "name=" << c.name << "\n"
    << "seed=" << c.seed << "\n"
    << "train_corpora=" << JoinList(c.train_corpora) << "\n"
    << "pool_training_corpora=" << Bool(c.pool_training_corpora) << "\n"
    << "metrics=" << JoinList(c.metrics) << "\n"
    << "test_fraction=" << Num(c.test_fraction) << "\n"
    << "val_fraction=" << Num(c.val_fraction) << "\n"
    << "chunk_seconds=" << Num(c.chunk_seconds) << "\n"
    << "utterance_scoring=" << Bool(c.utterance_scoring) << "\n"
    << "diversity_report=" << Bool(c.diversity_report) << "\n"
    << "domain_probe=" << Bool(c.domain_probe) << "\n"
    << "probe_input=" << c.probe_input << "\n";
  if (!c.data_dir.empty()) o << "data_dir=" << c.data_dir << "\n";
  for (const auto& cc : c.corpora) {
    o << "\n[corpus:" << cc.name << "]\n";
    if (!cc.manifest.empty()) o << "manifest=" << cc.manifest << "\n";
    o << "style=" << CorpusStyleName(cc.synth.style) << "\n"
      << "languages=" << cc.synth.num_languages << "\n"
      << "speakers=" << cc.synth.speakers_per_language << "\n"
      << "utterances=" << cc.synth.utts_per_speaker << "\n"
      << "seconds=" << Num(cc.synth.utt_seconds) << "\n"
      << "seed=" << cc.synth.seed << "\n";
  }
  const nn::ModelConfig& m = c.model;
  o << "\n[model]\n"
    << "family=" << nn::ModelFamilyName(m.family) << "\n"
    << "channels=" << m.channels << "\n"
    << "embedding_dim=" << m.embedding_dim << "\n"
    << "xvector_stats_dim=" << m.xvector_stats_dim << "\n"
    << "xvector_segment_dim=" << m.xvector_segment_dim << "\n"
    << "first_kernel=" << m.first_kernel << "\n"
    << "res2_scale=" << m.res2_scale << "\n"
    << "se_ratio=" << m.se_ratio << "\n"
    << "attention_dim=" << m.attention_dim << "\n";
  o << "dilations=";
  for (size_t k = 0; k < m.dilations.size(); ++k) o << (k ? "," : "") << m.dilations[k];
  o << "\n"
    << "dropout=" << Num(m.dropout) << "\n"
    << "am_scale=" << Num(m.am.scale) << "\n"
    << "am_margin=" << Num(m.am.margin) << "\n";
  const nn::TrainConfig& t = c.train;
  o << "\n[train]\n"
    << "batch_size=" << t.batch_size << "\n"
    << "learning_rate=" << Num(t.learning_rate) << "\n"
    << "weight_decay=" << Num(t.weight_decay) << "\n"
    << "max_epochs=" << t.max_epochs << "\n"
    << "early_stop_patience=" << t.early_stop_patience << "\n"
    << "plateau_factor=" << Num(t.plateau_factor) << "\n"
    << "plateau_patience=" << t.plateau_patience << "\n"
    << "min_learning_rate=" << Num(t.min_learning_rate) << "\n"
    << "restore_best=" << Bool(t.restore_best) << "\n"
    << "spec_aug=" << Bool(c.spec_aug) << "\n"
    << "mixup=" << Bool(c.mixup) << "\n"
    << "mixup_alpha=" << Num(c.mixup_alpha) << "\n";
  o << "\n[dg]\n"
    << "mode=" << dg::DgModeName(c.dg.mode) << "\n"
    << "lambda_initial=" << Num(c.dg.lambda.initial) << "\n"
    << "lambda_hold_epochs=" << c.dg.lambda.hold_epochs << "\n"
    << "lambda_increment=" << Num(c.dg.lambda.increment) << "\n"
    << "lambda_cap=" << Num(c.dg.lambda.cap) << "\n"
    << "kernels=" << c.dg.num_kernels << "\n"
    << "weights=" << c.md_weight_source << "\n"
    << "target_domains=" << JoinList(c.dg_target_domains) << "\n";
  o << "\n[fold]\n"
    << "gamma=" << Num(c.fold.gamma) << "\n"
    << "scenario=" << augment::FoldScenarioName(c.fold.scenario) << "\n";
  o << "\n[augment]\n"
    << "snr_min_db=" << Num(c.augment.snr_min_db) << "\n"
    << "snr_max_db=" << Num(c.augment.snr_max_db) << "\n";
  for (const auto& [k, v] : c.augment.banks) o << "bank_" << k << "=" << JoinList(v) << "\n";
  for (const auto& [k, v] : c.augment.lossy_encoders) o << "encoder_" << k << "=" << v << "\n";
  o << "\n[features]\n"
    << "num_filters=" << c.features.num_filters << "\n"
    << "num_ceps=" << c.features.num_ceps << "\n"
    << "frame_ms=" << Num(c.features.frame_ms) << "\n"
    << "hop_ms=" << Num(c.features.hop_ms) << "\n"
    << "log_floor=" << Num(c.features.log_floor) << "\n";
  return o.str();
}

void SaveConfig(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write config: " + path.string());
  out << ConfigToString(cfg);
}

std::vector<double> ReferenceDklRow() {
  return {0.353, 0.133, 0.257, 0.188, 0.205, 0.171, 0.065};
}

}  // namespace lidwb::harness
