// include/lidwb/diversity.h

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

#ifndef LIDWB_DIVERSITY_H_
#define LIDWB_DIVERSITY_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lidwb::diversity {

/// Diagonal Gaussian fitted to a set of embeddings.
struct GaussianStats {
  std::vector<double> mean;
  std::vector<double> var;
};

inline constexpr double kVarianceFloor = 1e-6;

/// Sample mean and unbiased per-dimension variance plus kVarianceFloor.
GaussianStats FitGaussian(const std::vector<std::vector<double>>& embs);

/// KL(p || q) for diagonal Gaussians.
double KlDivergence(const GaussianStats& p, const GaussianStats& q);
/// Average of both directions, or their sum when `jeffreys` is set.
double SymmetricKl(const GaussianStats& p, const GaussianStats& q, bool jeffreys = false);
/// 1 - cos(mean_p, mean_q).
double CosineDistance(const GaussianStats& p, const GaussianStats& q);

/// Pearson correlation of average ranks.
double Spearman(const std::vector<double>& x, const std::vector<double>& y);
/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> AverageRanks(const std::vector<double>& x);

enum class DivMetric { kKl, kSymKl, kCosine };
std::string DivMetricName(DivMetric m);

/// Square matrix over categories 0..K (0 = originals); diagonal is zero.
struct DiversityMatrix {
  DivMetric metric = DivMetric::kKl;
  std::vector<std::vector<double>> d;
};

/// For each category i in 1..K, the partner j != i (1..K) with the largest
/// entry in row i; ties go to the smaller index. `rows` holds categories
/// 1..K at indices 0..K-1.
std::map<int, int> PlanCascade(const std::vector<std::vector<double>>& rows);

struct DiversityReport {
  DiversityMatrix kl, sym_kl, cosine;
  /// D_KL(A0 || A_k) for k = 1..K (index k-1).
  std::vector<double> kl_from_original;
  std::optional<double> kl_original_to_cascaded;
  std::map<int, int> plan;
};

/// `embs[k]` holds the embeddings of category k = 0..K.
DiversityReport ComputeDiversityReport(
    const std::vector<std::vector<std::vector<double>>>& embs,
    const std::vector<std::vector<double>>* cascaded = nullptr);

/// Tab-separated KL matrix, then "plan.A<i>=A<j>" lines and the D_KL row.
void WriteDiversityReport(const std::filesystem::path& path, const DiversityReport& r);
/// Reads the plan lines written by WriteDiversityReport.
std::map<int, int> ReadCascadePlan(const std::filesystem::path& path);

}  // namespace lidwb::diversity

#endif  // LIDWB_DIVERSITY_H_
