// include/lidwb/manifest.h

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

#ifndef LIDWB_MANIFEST_H_
#define LIDWB_MANIFEST_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lidwb {

enum class Split { kTrain, kVal, kTest };

std::string SplitName(Split s);
Split ParseSplit(const std::string& s);

/// One row of a manifest: the join key between audio, labels and domains.
struct UtteranceRecord {
  std::string utt_id;
  std::string corpus_id;
  std::string language;
  std::string speaker_id;
  /// 0 = original, 1..7 = augmentation category; unset for cascaded copies,
  /// which carry no pseudo-domain class.
  std::optional<int> pseudo_domain = 0;
  Split split = Split::kTrain;
  /// WAV path, relative to the manifest directory unless absolute. Empty for
  /// augmented rows that are generated on demand.
  std::string path;
  int channel = 0;
  /// Original utterance of an augmented copy; empty for originals.
  std::string source_utt;
  /// Augmentation recipe ("A3:telephone", "A1:noise>A5:mmse"); empty for originals.
  std::string augment;

  bool IsOriginal() const { return augment.empty(); }
};

struct Manifest {
  std::vector<UtteranceRecord> rows;
  /// Directory that relative paths are resolved against.
  std::filesystem::path base_dir;

  std::filesystem::path ResolvePath(const UtteranceRecord& r) const;
  /// Sorted, de-duplicated language labels.
  std::vector<std::string> Languages() const;
  std::vector<std::string> Corpora() const;
  /// Throws on duplicate utt_ids or out-of-range pseudo-domains.
  void Validate() const;
};

/// Tab-separated with a header row.
Manifest ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path, const Manifest& manifest);

}  // namespace lidwb

#endif  // LIDWB_MANIFEST_H_
