// src/diversity.cc

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

#include "lidwb/diversity.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "lidwb/util/error.h"

namespace lidwb::diversity {

GaussianStats FitGaussian(const std::vector<std::vector<double>>& embs) {
  if (embs.size() < 2) throw Error("fit_gaussian: need at least two embeddings");
  const size_t d = embs[0].size();
  GaussianStats g;
  g.mean.assign(d, 0.0);
  g.var.assign(d, 0.0);
  for (const auto& e : embs) {
    if (e.size() != d) throw Error("fit_gaussian: inconsistent dimensions");
    for (size_t k = 0; k < d; ++k) g.mean[k] += e[k];
  }
  const auto n = static_cast<double>(embs.size());
  for (double& m : g.mean) m /= n;
  for (const auto& e : embs) {
    for (size_t k = 0; k < d; ++k) g.var[k] += (e[k] - g.mean[k]) * (e[k] - g.mean[k]);
  }
  for (double& v : g.var) v = v / (n - 1.0) + kVarianceFloor;
  return g;
}

double KlDivergence(const GaussianStats& p, const GaussianStats& q) {
  if (p.mean.size() != q.mean.size() || p.var.size() != p.mean.size() ||
      q.var.size() != q.mean.size()) {
    throw Error("kl_divergence: dimension mismatch");
  }
  double s = 0.0;
  for (size_t k = 0; k < p.mean.size(); ++k) {
    double dm = q.mean[k] - p.mean[k];
    s += p.var[k] / q.var[k] + dm * dm / q.var[k] - 1.0 + std::log(q.var[k] / p.var[k]);
  }
  return 0.5 * s;
}

double SymmetricKl(const GaussianStats& p, const GaussianStats& q, bool jeffreys) {
  double s = KlDivergence(p, q) + KlDivergence(q, p);
  return jeffreys ? s : 0.5 * s;
}

double CosineDistance(const GaussianStats& p, const GaussianStats& q) {
  if (p.mean.size() != q.mean.size()) throw Error("cosine_dist: dimension mismatch");
  double dot = 0.0, np = 0.0, nq = 0.0;
  for (size_t k = 0; k < p.mean.size(); ++k) {
    dot += p.mean[k] * q.mean[k];
    np += p.mean[k] * p.mean[k];
    nq += q.mean[k] * q.mean[k];
  }
  if (np == 0.0 || nq == 0.0) throw Error("cosine_dist: zero mean vector");
  return 1.0 - dot / std::sqrt(np * nq);
}

std::vector<double> AverageRanks(const std::vector<double>& x) {
  std::vector<size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (size_t i = 0; i < idx.size();) {
    size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double Spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("spearman: length mismatch");
  if (x.size() < 3) throw Error("spearman: need at least three pairs");
  std::vector<double> rx = AverageRanks(x), ry = AverageRanks(y);
  const auto n = static_cast<double>(x.size());
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("spearman: constant input");
  return sxy / std::sqrt(sxx * syy);
}

std::string DivMetricName(DivMetric m) {
  switch (m) {
    case DivMetric::kKl: return "kl";
    case DivMetric::kSymKl: return "sym_kl";
    case DivMetric::kCosine: return "cosine";
  }
  return "?";
}

std::map<int, int> PlanCascade(const std::vector<std::vector<double>>& rows) {
  const size_t k = rows.size();
  if (k < 2) throw Error("plan_cascade: need at least two categories");
  std::map<int, int> plan;
  for (size_t i = 0; i < k; ++i) {
    if (rows[i].size() != k) throw Error("plan_cascade: matrix is not square");
    int best = -1;
    for (size_t m = 0; m < k; ++m) {
      if (m == i) continue;
      if (best < 0 || rows[i][m] > rows[i][best]) best = static_cast<int>(m);
    }
    plan[static_cast<int>(i) + 1] = best + 1;
  }
  return plan;
}

DiversityReport ComputeDiversityReport(
    const std::vector<std::vector<std::vector<double>>>& embs,
    const std::vector<std::vector<double>>* cascaded) {
  const size_t n = embs.size();
  if (n < 3) throw Error("diversity report: need originals and at least two categories");
  std::vector<GaussianStats> g;
  for (size_t k = 0; k < n; ++k) {
    if (embs[k].size() < 2) {
      throw Error("diversity report: category A" + std::to_string(k) +
                  " has fewer than two utterances");
    }
    g.push_back(FitGaussian(embs[k]));
  }
  DiversityReport r;
  r.kl.metric = DivMetric::kKl;
  r.sym_kl.metric = DivMetric::kSymKl;
  r.cosine.metric = DivMetric::kCosine;
  for (DiversityMatrix* m : {&r.kl, &r.sym_kl, &r.cosine}) {
    m->d.assign(n, std::vector<double>(n, 0.0));
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      r.kl.d[i][j] = KlDivergence(g[i], g[j]);
      r.sym_kl.d[i][j] = SymmetricKl(g[i], g[j]);
      r.cosine.d[i][j] = CosineDistance(g[i], g[j]);
    }
  }
  for (size_t k = 1; k < n; ++k) r.kl_from_original.push_back(r.kl.d[0][k]);
  if (cascaded != nullptr) r.kl_original_to_cascaded = KlDivergence(g[0], FitGaussian(*cascaded));
  std::vector<std::vector<double>> rows(n - 1, std::vector<double>(n - 1));
  for (size_t i = 1; i < n; ++i) {
    for (size_t j = 1; j < n; ++j) rows[i - 1][j - 1] = r.kl.d[i][j];
  }
  r.plan = PlanCascade(rows);
  return r;
}

void WriteDiversityReport(const std::filesystem::path& path, const DiversityReport& r) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write diversity report: " + path.string());
  out << std::setprecision(6) << std::fixed;
  const size_t n = r.kl.d.size();
  out << "kl";
  for (size_t j = 0; j < n; ++j) out << "\tA" << j;
  out << "\n";
  for (size_t i = 0; i < n; ++i) {
    out << "A" << i;
    for (size_t j = 0; j < n; ++j) out << "\t" << r.kl.d[i][j];
    out << "\n";
  }
  out << "\n";
  for (size_t k = 0; k < r.kl_from_original.size(); ++k) {
    out << "dkl0.A" << k + 1 << "=" << r.kl_from_original[k] << "\n";
  }
  if (r.kl_original_to_cascaded) out << "dkl0.cascaded=" << *r.kl_original_to_cascaded << "\n";
  for (const auto& [i, j] : r.plan) out << "plan.A" << i << "=A" << j << "\n";
}

std::map<int, int> ReadCascadePlan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open diversity report: " + path.string());
  std::map<int, int> plan;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("plan.A", 0) != 0) continue;
    size_t eq = line.find("=A");
    if (eq == std::string::npos) throw Error("bad plan line: " + line);
    plan[std::stoi(line.substr(6, eq - 6))] = std::stoi(line.substr(eq + 2));
  }
  if (plan.empty()) throw Error("no cascade plan in " + path.string());
  return plan;
}

}  // namespace lidwb::diversity
