// src/harness/manifest.cc

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

#include "lidwb/manifest.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "lidwb/util/error.h"

namespace lidwb {
namespace {

const char* kHeader =
    "utt_id\tcorpus\tlanguage\tspeaker\tpseudo_domain\tsplit\tpath\tchannel\tsource\taugment";

std::string Field(const std::string& s) { return s.empty() ? "-" : s; }
std::string Unfield(const std::string& s) { return s == "-" ? "" : s; }

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, '\t')) out.push_back(cur);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

}  // namespace

std::string SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split ParseSplit(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw Error("unknown split '" + s + "'");
}

std::filesystem::path Manifest::ResolvePath(const UtteranceRecord& r) const {
  std::filesystem::path p(r.path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

std::vector<std::string> Manifest::Languages() const {
  std::set<std::string> s;
  for (const auto& r : rows) s.insert(r.language);
  return {s.begin(), s.end()};
}

std::vector<std::string> Manifest::Corpora() const {
  std::set<std::string> s;
  for (const auto& r : rows) s.insert(r.corpus_id);
  return {s.begin(), s.end()};
}

void Manifest::Validate() const {
  std::set<std::string> ids;
  for (const auto& r : rows) {
    if (r.utt_id.empty()) throw Error("manifest row with empty utt_id");
    if (!ids.insert(r.utt_id).second) throw Error("duplicate utt_id '" + r.utt_id + "'");
    if (r.pseudo_domain && (*r.pseudo_domain < 0 || *r.pseudo_domain > 7)) {
      throw Error("pseudo_domain out of range for '" + r.utt_id + "'");
    }
  }
}

Manifest ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest: " + path.string());
  Manifest m;
  m.base_dir = path.parent_path();
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw Error("manifest header mismatch in " + path.string());
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = SplitTabs(line);
    if (f.size() != 10) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected 10 fields");
    }
    UtteranceRecord r;
    r.utt_id = f[0];
    r.corpus_id = f[1];
    r.language = f[2];
    r.speaker_id = f[3];
    if (f[4] == "-") {
      r.pseudo_domain.reset();
    } else {
      r.pseudo_domain = std::stoi(f[4]);
    }
    r.split = ParseSplit(f[5]);
    r.path = Unfield(f[6]);
    r.channel = std::stoi(f[7]);
    r.source_utt = Unfield(f[8]);
    r.augment = Unfield(f[9]);
    m.rows.push_back(std::move(r));
  }
  m.Validate();
  return m;
}

void WriteManifest(const std::filesystem::path& path, const Manifest& manifest) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest: " + path.string());
  out << kHeader << '\n';
  for (const auto& r : manifest.rows) {
    out << r.utt_id << '\t' << r.corpus_id << '\t' << r.language << '\t' << r.speaker_id << '\t'
        << (r.pseudo_domain ? std::to_string(*r.pseudo_domain) : "-") << '\t'
        << SplitName(r.split) << '\t' << Field(r.path) << '\t' << r.channel << '\t'
        << Field(r.source_utt) << '\t' << Field(r.augment) << '\n';
  }
}

}  // namespace lidwb
