// tests/oracles.h

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

#ifndef LIDWB_TESTS_ORACLES_H_
#define LIDWB_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lidwb/eval.h"
#include "lidwb/util/rng.h"

namespace lidwb::test {

// Brute-force threshold sweep, independent of the DET code.
inline double EerOracle(const std::vector<double>& tar, const std::vector<double>& non) {
  std::set<double> th(tar.begin(), tar.end());
  th.insert(non.begin(), non.end());
  std::vector<double> ts(th.begin(), th.end());
  ts.push_back(std::numeric_limits<double>::infinity());
  auto far = [&](double t) {
    double c = 0;
    for (double s : non) c += s >= t;
    return c / non.size();
  };
  auto frr = [&](double t) {
    double c = 0;
    for (double s : tar) c += s < t;
    return c / tar.size();
  };
  double pa = far(ts[0]), pr = frr(ts[0]);
  if (pr >= pa) return pr == pa ? pa : 0.5 * (pa + pr);
  for (size_t k = 1; k < ts.size(); ++k) {
    double a = far(ts[k]), r = frr(ts[k]);
    if (r == a) return a;
    if (r > a) {
      // Intersect the segment (pa, pr) -> (a, r) with the diagonal.
      double u = (pa - pr) / ((pa - pr) - (a - r));
      return pa + u * (a - pa);
    }
    pa = a;
    pr = r;
  }
  return pa;
}

// Direct miss / false-alarm counting, grouped by utterance.
inline double CavgOracle(const eval::ScoreSet& s, double p_target = 0.5) {
  std::map<std::string, std::map<std::string, double>> by_utt;
  std::map<std::string, std::string> truth;
  std::set<std::string> langs;
  for (const auto& t : s.trials) {
    by_utt[t.utt_id][t.language] = t.score;
    langs.insert(t.language);
    if (t.is_target) truth[t.utt_id] = t.language;
  }
  const double n = static_cast<double>(langs.size());
  const double p_non = (1.0 - p_target) / (n - 1.0);
  double total = 0.0;
  for (const auto& lt : langs) {
    double miss = 0, tars = 0;
    std::map<std::string, std::pair<double, double>> fa;  // true lang -> (alarms, trials)
    for (const auto& [utt, scores] : by_utt) {
      auto it = scores.find(lt);
      if (it == scores.end()) continue;
      const std::string& tl = truth.at(utt);
      if (tl == lt) {
        tars += 1;
        miss += it->second < 0.0;
      } else {
        fa[tl].first += it->second >= 0.0;
        fa[tl].second += 1;
      }
    }
    double c = p_target * miss / tars;
    for (const auto& [ln, af] : fa) c += p_non * af.first / af.second;
    total += c;
  }
  return total / n;
}

// Random closed-set score set: every utterance scored against every language.
inline eval::ScoreSet RandomScoreSet(Rng& rng, bool coarse) {
  eval::ScoreSet s;
  const int nl = UniformInt(rng, 2, 5);
  const int nu = UniformInt(rng, 2 * nl, 40);
  const double sep = Uniform(rng, -1.0, 3.0);
  for (int u = 0; u < nu; ++u) {
    const int truth = u < nl ? u : UniformInt(rng, 0, nl - 1);
    for (int l = 0; l < nl; ++l) {
      eval::Trial t;
      t.utt_id = "u" + std::to_string(u);
      t.language = "L" + std::to_string(l);
      t.is_target = l == truth;
      t.score = Gaussian(rng) + (t.is_target ? sep : -sep / 2);
      if (coarse) t.score = std::round(t.score * 2.0) / 2.0;
      s.trials.push_back(t);
    }
  }
  return s;
}

}  // namespace lidwb::test

#endif  // LIDWB_TESTS_ORACLES_H_
