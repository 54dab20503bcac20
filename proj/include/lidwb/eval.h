// include/lidwb/eval.h

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

#ifndef LIDWB_EVAL_H_
#define LIDWB_EVAL_H_

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lidwb::eval {

/// One (test chunk, model language) detection trial.
struct Trial {
  std::string utt_id;
  std::string language;  // model language being detected
  bool is_target = false;
  double score = 0.0;
  std::string corpus;
};

struct ScoreSet {
  std::vector<Trial> trials;

  /// Distinct model languages, sorted.
  std::vector<std::string> Languages() const;
  void Validate() const;
};

/// Log posterior-odds against a flat prior over `log_post.size()` classes:
/// log(p/(1-p)) + log(L-1).
std::vector<double> LogOddsScores(const std::vector<double>& log_post);

/// Adds one trial per language from an L-way log posterior.
void AddPosteriorTrials(const std::string& utt_id, const std::string& corpus,
                        const std::string& true_language,
                        const std::vector<std::string>& languages,
                        const std::vector<double>& log_post, ScoreSet* set);

/// Averages chunk scores "<utt>#<k>" into one trial per utterance.
ScoreSet AverageByUtterance(const ScoreSet& s);

/// Equal error rate from raw target and non-target scores.
double EerFromScores(const std::vector<double>& tar, const std::vector<double>& non);
/// One-vs-all EER for `language`.
double Eer(const ScoreSet& s, const std::string& language);
double MeanEer(const ScoreSet& s);

/// Average detection cost with hard decisions score >= threshold.
double Cavg(const ScoreSet& s, double p_target = 0.5, double threshold = 0.0);

struct DetPoint {
  double threshold;
  double far;
  double frr;
};

/// Staircase over every distinct score, followed by a point above the
/// largest score (far = 0, frr = 1). Thresholds ascend.
std::vector<DetPoint> DetPointsFromScores(const std::vector<double>& tar,
                                          const std::vector<double>& non);
std::vector<DetPoint> DetPoints(const ScoreSet& s, const std::string& language);
void WriteDetCsv(const std::filesystem::path& path, const std::vector<DetPoint>& pts);
/// Normal-deviate axes, one polyline per named curve.
void WriteDetSvg(const std::filesystem::path& path,
                 const std::vector<std::pair<std::string, std::vector<DetPoint>>>& curves);

struct MismatchMatrix {
  std::string metric;
  std::vector<std::string> corpora;
  std::vector<std::vector<double>> d;
};

/// D[i][j] = |g(i,i) - g(i,j)|. Every (i,i) must be present.
MismatchMatrix ComputeMismatch(
    const std::map<std::pair<std::string, std::string>, double>& results,
    const std::string& metric);
void WriteMismatch(const std::filesystem::path& path, const MismatchMatrix& m);
/// Several matrices, separated by blank lines.
void WriteMismatch(const std::filesystem::path& path, const std::vector<MismatchMatrix>& ms);
MismatchMatrix ReadMismatch(const std::filesystem::path& path);

void WriteScores(const std::filesystem::path& path, const ScoreSet& s);
ScoreSet ReadScores(const std::filesystem::path& path);

}  // namespace lidwb::eval

#endif  // LIDWB_EVAL_H_
