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
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "ctcmarg/candidates.hpp"
#include "ctcmarg/ctc.hpp"
#include "ctcmarg/lattice.hpp"
#include "ctcmarg/logmath.hpp"

namespace ctcmarg {

// CTC prefix beam search with beam width K. Prefixes are merged by their
// collapsed sequence, carrying separate mass for "ends in blank" and "ends
// in the last label" so that run extension and run restart stay distinct.
// Survivors are re-scored exactly with label_logprob; the pruning score is
// only a search heuristic and never leaks into the output. Candidates that
// re-score to -inf are dropped. Result is sorted by candidate_before.
//
// With K at least the number of prefixes alive at any frame (for strictly
// positive lattices: the size of the reachable sequence set), nothing is
// ever pruned and the output is the exact top of the full distribution.
inline CandidateSet prefix_beam_search(const EmissionLattice& lattice,
                                       int32_t beam_width) {
  if (beam_width < 1) throw ConfigError("beam width must be >= 1");
  const int32_t T = lattice.num_frames();
  const int32_t blank = lattice.blank_index();

  struct Mass {
    double blank_end = kLogZero;  // alignments ending in a blank frame
    double label_end = kLogZero;  // alignments ending inside the last run
    double total() const { return log_add(blank_end, label_end); }
  };
  using Beam = std::map<LabelSeq, Mass>;

  Beam beam;
  beam[LabelSeq{}] = Mass{0.0, kLogZero};

  for (int32_t t = 0; t < T; ++t) {
    Beam next;
    for (const auto& [prefix, mass] : beam) {
      double total = mass.total();
      // Blank keeps the prefix and seals the current run.
      double lp_blank = lattice.at(t, blank);
      if (lp_blank != kLogZero) {
        Mass& m = next[prefix];
        m.blank_end = log_add(m.blank_end, total + lp_blank);
      }
      for (int32_t s = 0; s < blank; ++s) {
        double lp = lattice.at(t, s);
        if (lp == kLogZero) continue;
        if (!prefix.empty() && prefix.back() == s) {
          // Same label again: either the run continues (no new output) or
          // a blank separated the runs and a second copy starts.
          Mass& same = next[prefix];
          same.label_end = log_add(same.label_end, mass.label_end + lp);
          if (mass.blank_end != kLogZero) {
            LabelSeq grown = prefix;
            grown.push_back(s);
            Mass& m = next[grown];
            m.label_end = log_add(m.label_end, mass.blank_end + lp);
          }
        } else {
          LabelSeq grown = prefix;
          grown.push_back(s);
          Mass& m = next[grown];
          m.label_end = log_add(m.label_end, total + lp);
        }
      }
    }
    // Prune to the top beam_width prefixes by total mass.
    if (static_cast<int32_t>(next.size()) > beam_width) {
      std::vector<std::pair<double, const LabelSeq*>> order;
      order.reserve(next.size());
      for (const auto& [prefix, mass] : next)
        order.emplace_back(mass.total(), &prefix);
      std::sort(order.begin(), order.end(),
                [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first > b.first;
                  if (a.second->size() != b.second->size())
                    return a.second->size() < b.second->size();
                  return *a.second < *b.second;
                });
      Beam pruned;
      for (int32_t i = 0; i < beam_width; ++i)
        pruned.emplace(*order[i].second, next[*order[i].second]);
      next.swap(pruned);
    }
    beam.swap(next);
  }

  CandidateSet out;
  out.strategy = Strategy::kTkm;
  for (const auto& [prefix, mass] : beam) {
    (void)mass;
    double exact = label_logprob(lattice, prefix);
    if (exact == kLogZero) continue;
    out.candidates.push_back(Candidate{prefix, exact});
  }
  std::sort(out.candidates.begin(), out.candidates.end(), candidate_before);
  if (static_cast<int32_t>(out.candidates.size()) > beam_width)
    out.candidates.resize(beam_width);
  return out;
}

}  // namespace ctcmarg
