// include/lidwb/harness/config.h

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

#ifndef LIDWB_HARNESS_CONFIG_H_
#define LIDWB_HARNESS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lidwb/augment.h"
#include "lidwb/dg.h"
#include "lidwb/features.h"
#include "lidwb/harness/synth.h"
#include "lidwb/nn/models.h"
#include "lidwb/nn/train.h"

namespace lidwb::harness {

/// A corpus is either an existing manifest or generated from `synth`.
struct CorpusConfig {
  std::string name;
  std::string manifest;  // empty: synthesize
  SynthOptions synth;
};

struct ExperimentConfig {
  std::string name = "experiment";
  uint64_t seed = 1;
  std::vector<CorpusConfig> corpora;
  /// One independent model per entry; each sees only its own training data.
  std::vector<std::string> train_corpora;
  /// Combining training corpora is not allowed; kept so the check is explicit.
  bool pool_training_corpora = false;
  std::vector<std::string> metrics = {"eer", "cavg"};
  double test_fraction = 0.34;
  double val_fraction = 0.2;
  double chunk_seconds = 3.0;
  bool utterance_scoring = false;
  bool diversity_report = false;
  bool domain_probe = false;
  /// "embedding" (LID embedding) or "pooled" (encoder output Z).
  std::string probe_input = "embedding";
  std::string data_dir;  // empty: <run dir>/data

  nn::ModelConfig model;
  nn::TrainConfig train;
  bool spec_aug = false;
  bool mixup = false;
  double mixup_alpha = 0.2;

  dg::DgConfig dg;
  /// Where MD-MMD weights come from: uniform | reference | computed | file:<report>.
  std::string md_weight_source = "uniform";
  /// Sources of domain-labelled data. Only "pseudo" (augmented copies of the
  /// training corpus) is permitted.
  std::vector<std::string> dg_target_domains = {"pseudo"};

  augment::FoldConfig fold;
  augment::AugmentOptions augment;
  FeatureOptions features;

  const CorpusConfig& Corpus(const std::string& name) const;
  /// Enforces the single-training-corpus and no-target-feedback rules.
  void Validate() const;
};

/// Line-based INI with sections [experiment], [corpus:<name>], [model],
/// [train], [dg], [fold], [augment], [features]. Missing keys keep defaults.
ExperimentConfig LoadConfig(const std::filesystem::path& path);
ExperimentConfig ParseConfig(const std::string& text);
/// Every effective value, in a form LoadConfig reads back unchanged.
std::string ConfigToString(const ExperimentConfig& cfg);
void SaveConfig(const std::filesystem::path& path, const ExperimentConfig& cfg);

/// Reference D_KL(A0 || Ak) values, k = 1..7, for the "reference" weight source.
std::vector<double> ReferenceDklRow();

}  // namespace lidwb::harness

#endif  // LIDWB_HARNESS_CONFIG_H_
