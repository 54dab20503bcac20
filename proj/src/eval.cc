// src/eval.cc

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

#include "lidwb/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "lidwb/util/error.h"

namespace lidwb::eval {

std::vector<std::string> ScoreSet::Languages() const {
  std::set<std::string> s;
  for (const auto& t : trials) s.insert(t.language);
  return {s.begin(), s.end()};
}

void ScoreSet::Validate() const {
  for (const auto& t : trials) {
    if (!std::isfinite(t.score)) throw Error("non-finite score for " + t.utt_id);
  }
}

std::vector<double> LogOddsScores(const std::vector<double>& log_post) {
  const size_t l = log_post.size();
  if (l < 2) throw Error("log-odds: need at least two classes");
  std::vector<double> out(l);
  for (size_t k = 0; k < l; ++k) {
    // log(1 - p) via log-sum-exp of the other classes
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < l; ++j) {
      if (j != k) mx = std::max(mx, log_post[j]);
    }
    double acc = 0.0;
    for (size_t j = 0; j < l; ++j) {
      if (j != k) acc += std::exp(log_post[j] - mx);
    }
    double log_rest = mx + std::log(acc);
    out[k] = log_post[k] - log_rest + std::log(static_cast<double>(l - 1));
  }
  return out;
}

void AddPosteriorTrials(const std::string& utt_id, const std::string& corpus,
                        const std::string& true_language,
                        const std::vector<std::string>& languages,
                        const std::vector<double>& log_post, ScoreSet* set) {
  if (languages.size() != log_post.size()) throw Error("posterior size mismatch");
  std::vector<double> sc = LogOddsScores(log_post);
  for (size_t k = 0; k < languages.size(); ++k) {
    set->trials.push_back({utt_id, languages[k], languages[k] == true_language, sc[k], corpus});
  }
}

ScoreSet AverageByUtterance(const ScoreSet& s) {
  std::map<std::pair<std::string, std::string>, std::pair<Trial, int>> acc;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& t : s.trials) {
    std::string utt = t.utt_id.substr(0, t.utt_id.find('#'));
    auto key = std::make_pair(utt, t.language);
    auto it = acc.find(key);
    if (it == acc.end()) {
      Trial u = t;
      u.utt_id = utt;
      acc.emplace(key, std::make_pair(u, 1));
      order.push_back(key);
    } else {
      it->second.first.score += t.score;
      it->second.second += 1;
    }
  }
  ScoreSet out;
  for (const auto& k : order) {
    Trial t = acc[k].first;
    t.score /= acc[k].second;
    out.trials.push_back(t);
  }
  return out;
}

std::vector<DetPoint> DetPointsFromScores(const std::vector<double>& tar,
                                          const std::vector<double>& non) {
  if (tar.empty() || non.empty()) throw Error("eer: need target and non-target trials");
  std::vector<double> t = tar, n = non;
  std::sort(t.begin(), t.end());
  std::sort(n.begin(), n.end());
  std::vector<double> thr;
  thr.reserve(t.size() + n.size());
  std::merge(t.begin(), t.end(), n.begin(), n.end(), std::back_inserter(thr));
  thr.erase(std::unique(thr.begin(), thr.end()), thr.end());
  std::vector<DetPoint> pts;
  pts.reserve(thr.size() + 1);
  const auto nt = static_cast<double>(t.size()), nn = static_cast<double>(n.size());
  size_t it = 0, in = 0;  // counts strictly below threshold
  for (double th : thr) {
    while (it < t.size() && t[it] < th) ++it;
    while (in < n.size() && n[in] < th) ++in;
    pts.push_back({th, (nn - static_cast<double>(in)) / nn, static_cast<double>(it) / nt});
  }
  pts.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  return pts;
}

double EerFromScores(const std::vector<double>& tar, const std::vector<double>& non) {
  std::vector<DetPoint> p = DetPointsFromScores(tar, non);
  for (size_t k = 0; k < p.size(); ++k) {
    double diff = p[k].frr - p[k].far;
    if (diff == 0.0) return p[k].far;
    if (diff > 0.0) {
      if (k == 0) return 0.5 * (p[k].far + p[k].frr);
      // segment from previous point (frr < far) to this one
      double d0 = p[k - 1].far - p[k - 1].frr;
      double d1 = p[k].far - p[k].frr;
      double a = d0 / (d0 - d1);
      return p[k - 1].frr + a * (p[k].frr - p[k - 1].frr);
    }
  }
  return p.back().far;
}

namespace {

void Split(const ScoreSet& s, const std::string& language, std::vector<double>* tar,
           std::vector<double>* non) {
  for (const auto& t : s.trials) {
    if (t.language != language) continue;
    (t.is_target ? tar : non)->push_back(t.score);
  }
  if (tar->empty()) throw Error("eer: no target trials for " + language);
  if (non->empty()) throw Error("eer: no non-target trials for " + language);
}

}  // namespace

double Eer(const ScoreSet& s, const std::string& language) {
  std::vector<double> tar, non;
  Split(s, language, &tar, &non);
  return EerFromScores(tar, non);
}

double MeanEer(const ScoreSet& s) {
  std::vector<std::string> langs = s.Languages();
  if (langs.empty()) throw Error("mean_eer: empty score set");
  double acc = 0.0;
  for (const auto& l : langs) acc += Eer(s, l);
  return acc / static_cast<double>(langs.size());
}

double Cavg(const ScoreSet& s, double p_target, double threshold) {
  std::vector<std::string> langs = s.Languages();
  const size_t nl = langs.size();
  if (nl < 2) throw Error("cavg: need at least two languages");
  std::map<std::string, size_t> li;
  for (size_t k = 0; k < nl; ++k) li[langs[k]] = k;
  // true language per utterance, taken from its target trial
  std::map<std::string, size_t> truth;
  for (const auto& t : s.trials) {
    if (t.is_target) truth[t.utt_id] = li.at(t.language);
  }
  std::vector<double> miss(nl, 0.0), ntar(nl, 0.0);
  std::vector<std::vector<double>> fa(nl, std::vector<double>(nl, 0.0));
  std::vector<std::vector<double>> nnon(nl, std::vector<double>(nl, 0.0));
  for (const auto& t : s.trials) {
    size_t m = li.at(t.language);
    bool accept = t.score >= threshold;
    if (t.is_target) {
      ntar[m] += 1.0;
      if (!accept) miss[m] += 1.0;
    } else {
      auto it = truth.find(t.utt_id);
      if (it == truth.end()) throw Error("cavg: no target trial for " + t.utt_id);
      nnon[m][it->second] += 1.0;
      if (accept) fa[m][it->second] += 1.0;
    }
  }
  const double p_non = (1.0 - p_target) / static_cast<double>(nl - 1);
  double c = 0.0;
  for (size_t t = 0; t < nl; ++t) {
    if (ntar[t] == 0.0) throw Error("cavg: no target trials for " + langs[t]);
    double term = p_target * miss[t] / ntar[t];
    for (size_t n = 0; n < nl; ++n) {
      if (n == t || nnon[t][n] == 0.0) continue;
      term += p_non * fa[t][n] / nnon[t][n];
    }
    c += term;
  }
  return c / static_cast<double>(nl);
}

std::vector<DetPoint> DetPoints(const ScoreSet& s, const std::string& language) {
  std::vector<double> tar, non;
  Split(s, language, &tar, &non);
  return DetPointsFromScores(tar, non);
}

void WriteDetCsv(const std::filesystem::path& path, const std::vector<DetPoint>& pts) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "threshold,far,frr\n" << std::setprecision(8);
  for (const auto& p : pts) out << p.threshold << "," << p.far << "," << p.frr << "\n";
}

void WriteDetSvg(const std::filesystem::path& path,
                 const std::vector<std::pair<std::string, std::vector<DetPoint>>>& curves) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  const boost::math::normal nd;
  const double lo = 0.001, hi = 0.6;
  const double zlo = boost::math::quantile(nd, lo), zhi = boost::math::quantile(nd, hi);
  const double w = 480, h = 480, pad = 50;
  auto px = [&](double p) {
    double z = boost::math::quantile(nd, std::clamp(p, lo, hi));
    return pad + (z - zlo) / (zhi - zlo) * (w - 2 * pad);
  };
  auto py = [&](double p) {
    double z = boost::math::quantile(nd, std::clamp(p, lo, hi));
    return h - pad - (z - zlo) / (zhi - zlo) * (h - 2 * pad);
  };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf"};
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (double t : {0.001, 0.01, 0.05, 0.1, 0.2, 0.4}) {
    out << "<line x1=\"" << px(t) << "\" y1=\"" << pad << "\" x2=\"" << px(t) << "\" y2=\""
        << h - pad << "\" stroke=\"#ddd\"/>\n";
    out << "<line x1=\"" << pad << "\" y1=\"" << py(t) << "\" x2=\"" << w - pad << "\" y2=\""
        << py(t) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << px(t) << "\" y=\"" << h - pad + 14 << "\" text-anchor=\"middle\">"
        << t * 100 << "</text>\n";
    out << "<text x=\"" << pad - 4 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">"
        << t * 100 << "</text>\n";
  }
  out << "<text x=\"" << w / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\">False acceptance rate (%)</text>\n";
  out << "<text x=\"14\" y=\"" << h / 2 << "\" transform=\"rotate(-90 14 " << h / 2
      << ")\" text-anchor=\"middle\">False rejection rate (%)</text>\n";
  for (size_t c = 0; c < curves.size(); ++c) {
    const char* col = kColors[c % 7];
    out << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
    for (const auto& p : curves[c].second) out << px(p.far) << "," << py(p.frr) << " ";
    out << "\"/>\n";
    out << "<text x=\"" << w - pad - 4 << "\" y=\"" << pad + 14 * (c + 1) << "\" fill=\"" << col
        << "\" text-anchor=\"end\">" << curves[c].first << "</text>\n";
  }
  out << "</svg>\n";
}

MismatchMatrix ComputeMismatch(
    const std::map<std::pair<std::string, std::string>, double>& results,
    const std::string& metric) {
  std::set<std::string> names;
  for (const auto& [k, v] : results) {
    names.insert(k.first);
    names.insert(k.second);
  }
  MismatchMatrix m;
  m.metric = metric;
  m.corpora.assign(names.begin(), names.end());
  const size_t n = m.corpora.size();
  m.d.assign(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    const std::string& a = m.corpora[i];
    auto same = results.find({a, a});
    bool trained = false;
    for (const auto& [k, v] : results) trained = trained || k.first == a;
    if (!trained) continue;
    if (same == results.end()) throw Error("mismatch: missing same-corpus result for " + a);
    for (size_t j = 0; j < n; ++j) {
      auto cross = results.find({a, m.corpora[j]});
      if (cross == results.end()) continue;
      m.d[i][j] = std::fabs(same->second - cross->second);
    }
  }
  return m;
}

namespace {

void FormatMismatch(std::ostream& out, const MismatchMatrix& m) {
  out << std::fixed << std::setprecision(4) << m.metric;
  for (const auto& c : m.corpora) out << "\t" << c;
  out << "\n";
  for (size_t i = 0; i < m.corpora.size(); ++i) {
    out << m.corpora[i];
    for (double v : m.d[i]) out << "\t" << v;
    out << "\n";
  }
}

}  // namespace

void WriteMismatch(const std::filesystem::path& path, const MismatchMatrix& m) {
  WriteMismatch(path, std::vector<MismatchMatrix>{m});
}

void WriteMismatch(const std::filesystem::path& path, const std::vector<MismatchMatrix>& ms) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (size_t k = 0; k < ms.size(); ++k) {
    if (k) out << "\n";
    FormatMismatch(out, ms[k]);
  }
}

MismatchMatrix ReadMismatch(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  MismatchMatrix m;
  std::string line;
  if (!std::getline(in, line)) throw Error("empty mismatch file " + path.string());
  std::istringstream head(line);
  head >> m.metric;
  for (std::string c; head >> c;) m.corpora.push_back(c);
  while (std::getline(in, line) && !line.empty()) {
    std::istringstream row(line);
    std::string name;
    row >> name;
    std::vector<double> v;
    for (double x; row >> x;) v.push_back(x);
    if (v.size() != m.corpora.size()) throw Error("ragged mismatch row in " + path.string());
    m.d.push_back(v);
  }
  return m;
}

void WriteScores(const std::filesystem::path& path, const ScoreSet& s) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(9);
  for (const auto& t : s.trials) {
    out << t.utt_id << "\t" << t.language << "\t" << (t.is_target ? 1 : 0) << "\t" << t.score
        << "\n";
  }
}

ScoreSet ReadScores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open score file: " + path.string());
  ScoreSet s;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Trial t;
    int tgt = 0;
    if (!(ss >> t.utt_id >> t.language >> tgt >> t.score)) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": bad score line");
    }
    t.is_target = tgt != 0;
    s.trials.push_back(t);
  }
  s.Validate();
  return s;
}

}  // namespace lidwb::eval
