// include/lidwb/harness/experiment.h

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

#ifndef LIDWB_HARNESS_EXPERIMENT_H_
#define LIDWB_HARNESS_EXPERIMENT_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lidwb/diversity.h"
#include "lidwb/eval.h"
#include "lidwb/harness/config.h"
#include "lidwb/manifest.h"
#include "lidwb/nn/train.h"

namespace lidwb::harness {

struct ModelResult {
  std::string train_corpus;
  nn::TrainHistory history;
  std::map<std::string, double> eer;   // by test corpus
  std::map<std::string, double> cavg;  // by test corpus
  std::optional<double> probe_accuracy;
  std::optional<diversity::DiversityReport> diversity;
};

struct RunResult {
  std::vector<std::string> languages;
  std::vector<ModelResult> models;
  std::vector<eval::MismatchMatrix> mismatch;  // one per configured metric

  const ModelResult& Model(const std::string& train_corpus) const;
  /// Mean EER of a model over every test corpus other than its own.
  double CrossCorpusMeanEer(const std::string& train_corpus) const;
};

/// Synthesizes (or reuses) every corpus and assigns splits. Manifests come
/// back in configuration order.
std::vector<Manifest> PrepareCorpora(const ExperimentConfig& cfg,
                                     const std::filesystem::path& run_dir);

/// Shared, sorted language set; throws unless every corpus covers it.
std::vector<std::string> ClosedLanguageSet(const std::vector<Manifest>& corpora);

/// Full pipeline. Layout of `run_dir`:
///   config.snapshot, metrics.tsv, mismatch.tsv,
///   train-<corpus>/{model.ckpt, train_manifest.tsv, history.tsv,
///                   scores/<test corpus>.tsv, probe.tsv, diversity.txt}
RunResult RunExperiment(const ExperimentConfig& cfg, const std::filesystem::path& run_dir,
                        std::ostream* log);

/// Embeddings of the balanced eight-domain copies of `rows`, grouped by
/// pseudo-domain, and the diversity report computed from them.
diversity::DiversityReport DiversityFromModel(const nn::LidModel& model, const Manifest& m,
                                              const std::vector<size_t>& rows,
                                              const std::vector<std::string>& languages,
                                              const ExperimentConfig& cfg);

/// The "dkl0.A<k>=" lines of a diversity report, k = 1..7.
std::vector<double> ReadDklRow(const std::filesystem::path& report);

}  // namespace lidwb::harness

#endif  // LIDWB_HARNESS_EXPERIMENT_H_
