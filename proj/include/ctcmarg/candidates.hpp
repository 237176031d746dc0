// Copyright (c) 2026 The ctcmarg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ctcmarg/errors.hpp"
#include "ctcmarg/vocab.hpp"

namespace ctcmarg {

enum class Strategy { kTkm, kRandomizedTkm, kSkm };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kTkm: return "TKM";
    case Strategy::kRandomizedTkm: return "RANDOMIZED_TKM";
    case Strategy::kSkm: return "SKM";
  }
  return "?";
}

inline Strategy strategy_from_name(const std::string& name) {
  std::string lower;
  for (char c : name) lower += static_cast<char>(std::tolower(c));
  if (lower == "tkm") return Strategy::kTkm;
  if (lower == "randomized_tkm") return Strategy::kRandomizedTkm;
  if (lower == "skm") return Strategy::kSkm;
  throw ConfigError("unknown strategy '" + name + "'");
}

// One scored recognition hypothesis. log_weight is always the exact
// lattice score of `labels` on the generating lattice; generators never
// emit a candidate whose weight is -inf.
struct Candidate {
  LabelSeq labels;
  double log_weight = 0.0;
};

// Deterministic ordering shared by every generator: weight descending,
// then shorter sequence, then lexicographic.
inline bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.log_weight != b.log_weight) return a.log_weight > b.log_weight;
  if (a.labels.size() != b.labels.size())
    return a.labels.size() < b.labels.size();
  return a.labels < b.labels;
}

struct CandidateSet {
  std::vector<Candidate> candidates;
  Strategy strategy = Strategy::kTkm;

  size_t size() const { return candidates.size(); }
  bool empty() const { return candidates.empty(); }
  const Candidate& operator[](size_t i) const { return candidates[i]; }

  int32_t distinct_count() const {
    std::map<LabelSeq, int> seen;
    for (const auto& c : candidates) seen[c.labels]++;
    return static_cast<int32_t>(seen.size());
  }
};

// Merge candidates sharing the same label sequence into one entry. Weights
// of duplicates are equal by construction (same sequence, same lattice), so
// the survivor keeps the weight unchanged. Output is in candidate order.
inline CandidateSet dedup_merge(const CandidateSet& set) {
  CandidateSet out;
  out.strategy = set.strategy;
  std::map<LabelSeq, bool> seen;
  for (const auto& c : set.candidates) {
    if (seen.emplace(c.labels, true).second) out.candidates.push_back(c);
  }
  return out;
}

// Generation settings recorded alongside a serialized candidate set.
struct CandidateMeta {
  int32_t K = 0;
  int32_t n = 0;            // 0 when the strategy takes no subset size
  double temperature = 0.0;  // 0 when the strategy takes no temperature
  uint64_t seed = 0;
};

// TSV layout: a comment line with the generation settings, then one line
// per candidate: log_weight <TAB> space-joined phoneme symbols.
inline void write_candidates(std::ostream& out, const CandidateSet& set,
                             const PhonemeVocab& vocab,
                             const CandidateMeta& meta) {
  char buf[64];
  out << "# strategy=" << strategy_name(set.strategy) << " K=" << meta.K
      << " n=" << meta.n;
  std::snprintf(buf, sizeof(buf), "%.17g", meta.temperature);
  out << " temperature=" << buf << " seed=" << meta.seed << '\n';
  for (const auto& c : set.candidates) {
    std::snprintf(buf, sizeof(buf), "%.17g", c.log_weight);
    out << buf << '\t' << join_symbols(c.labels, vocab) << '\n';
  }
}

inline CandidateSet read_candidates(std::istream& in,
                                    const PhonemeVocab& vocab,
                                    CandidateMeta* meta_out = nullptr) {
  CandidateSet set;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (header_seen) throw ParseError("repeated candidate header");
      header_seen = true;
      CandidateMeta meta;
      std::istringstream hs(line.substr(1));
      std::string item;
      while (hs >> item) {
        auto eq = item.find('=');
        if (eq == std::string::npos) continue;
        std::string key = item.substr(0, eq), value = item.substr(eq + 1);
        try {
          if (key == "strategy") set.strategy = strategy_from_name(value);
          else if (key == "K") meta.K = std::stoi(value);
          else if (key == "n") meta.n = std::stoi(value);
          else if (key == "temperature") meta.temperature = std::stod(value);
          else if (key == "seed") meta.seed = std::stoull(value);
        } catch (const std::exception&) {
          throw ParseError("bad candidate header item '" + item + "'");
        }
      }
      if (meta_out) *meta_out = meta;
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("candidate line without tab: " + line);
    Candidate c;
    try {
      c.log_weight = std::stod(line.substr(0, tab));
    } catch (const std::exception&) {
      throw ParseError("bad candidate weight in line: " + line);
    }
    c.labels = parse_symbols(line.substr(tab + 1), vocab);
    set.candidates.push_back(std::move(c));
  }
  return set;
}

}  // namespace ctcmarg
