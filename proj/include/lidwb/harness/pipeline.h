// include/lidwb/harness/pipeline.h

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

#ifndef LIDWB_HARNESS_PIPELINE_H_
#define LIDWB_HARNESS_PIPELINE_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lidwb/audio_io.h"
#include "lidwb/eval.h"
#include "lidwb/features.h"
#include "lidwb/harness/config.h"
#include "lidwb/manifest.h"
#include "lidwb/nn/models.h"
#include "lidwb/nn/train.h"

namespace lidwb::harness {

/// One fixed-length chunk ready for the network.
struct Item {
  std::string id;  // "<utt_id>#<chunk>"
  std::string corpus;
  int language = -1;
  int domain = 0;  // pseudo-domain 0..7, -1 for cascaded copies
  FeatureMatrix feats;
};

/// Waveform of a manifest row. Augmented rows are regenerated from their
/// source utterance with AugmentSeed(seed, utt_id, recipe).
Waveform LoadRowWaveform(const Manifest& m, const UtteranceRecord& row, uint64_t seed,
                         const augment::AugmentOptions& opts);

/// VAD, fixed-length chunking and MFCC (with CMS) for the selected rows.
/// Utterances shorter than one chunk contribute a single shorter item when
/// at least one second of speech remains.
std::vector<Item> ExtractItems(const Manifest& m, const std::vector<size_t>& rows,
                               const std::vector<std::string>& languages,
                               const ExperimentConfig& cfg);

std::vector<size_t> SelectRows(const Manifest& m, const std::string& corpus, Split split,
                               bool originals_only);

struct TrainedModel {
  std::unique_ptr<nn::LidModel> model;
  std::unique_ptr<nn::DomainHead> head;
  nn::TrainHistory history;
  std::vector<std::string> languages;
};

/// Trains one LID model (plain or with the configured DG objective).
TrainedModel TrainLidModel(const std::vector<Item>& train, const std::vector<Item>& val,
                           const std::vector<std::string>& languages,
                           const ExperimentConfig& cfg, uint64_t seed, std::ostream* log);

/// Checkpoint with the model configuration and language list as metadata.
void SaveModel(const std::filesystem::path& path, const TrainedModel& m);
TrainedModel LoadModel(const std::filesystem::path& path);

/// One trial per (item, language) from the model's log-posteriors.
eval::ScoreSet ScoreItems(const nn::LidModel& model, const std::vector<Item>& items,
                          const std::vector<std::string>& languages);

/// LID embeddings, or the encoder output Z when `pooled` is set.
std::vector<std::vector<double>> EmbedItems(const nn::LidModel& model,
                                            const std::vector<Item>& items, bool pooled = false);

/// For each original row, the original plus one copy per category 1..7
/// (random sub-category), labelled with its pseudo-domain.
Manifest BalancedDomainManifest(const Manifest& m, const std::vector<size_t>& rows,
                                uint64_t seed);

/// Linear-probe pseudo-domain accuracy from frozen representations: fitted
/// on `train`, measured on `test`.
double DomainProbeAccuracy(const nn::LidModel& model, const std::vector<Item>& train,
                           const std::vector<Item>& test, bool pooled, uint64_t seed);

}  // namespace lidwb::harness

#endif  // LIDWB_HARNESS_PIPELINE_H_
