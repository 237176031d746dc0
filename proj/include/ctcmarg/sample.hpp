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
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ctcmarg/candidates.hpp"
#include "ctcmarg/ctc.hpp"
#include "ctcmarg/lattice.hpp"
#include "ctcmarg/rng.hpp"

namespace ctcmarg {

// Draw one alignment, frame by frame, each frame independently from its
// own posterior row.
inline Alignment sample_alignment(const EmissionLattice& lattice, Rng& rng) {
  Alignment out(lattice.num_frames());
  std::vector<double> probs(lattice.num_states());
  for (int32_t t = 0; t < lattice.num_frames(); ++t) {
    const double* r = lattice.row(t);
    double total = 0.0;
    for (int32_t s = 0; s < lattice.num_states(); ++s) {
      probs[s] = (r[s] == kLogZero) ? 0.0 : std::exp(r[s]);
      total += probs[s];
    }
    out[t] = rng.categorical(probs, total);
  }
  return out;
}

// Frame-sampled candidate generation: flatten the lattice with the given
// temperature, draw num_samples alignments from the flattened rows,
// collapse each, and score every surviving sequence on the original,
// untempered lattice. Temperature shapes only where the samples land; the
// weights stay faithful to the source distribution. Duplicates are merged
// unless keep_duplicates is set (each copy then keeps its own entry).
inline CandidateSet skm_sample_candidates(const EmissionLattice& lattice,
                                          int32_t num_samples,
                                          double temperature, Rng& rng,
                                          bool keep_duplicates = false) {
  if (num_samples < 1) throw ConfigError("sample count must be >= 1");
  EmissionLattice tempered = apply_temperature(lattice, temperature);
  CandidateSet raw;
  raw.strategy = Strategy::kSkm;
  for (int32_t k = 0; k < num_samples; ++k) {
    Alignment a = sample_alignment(tempered, rng);
    raw.candidates.push_back(
        Candidate{collapse(a, lattice.blank_index()), kLogZero});
  }
  CandidateSet picked = keep_duplicates ? raw : dedup_merge(raw);
  // Tempering preserves each row's support, so a sampled alignment has
  // positive probability on the original lattice and so does its collapse.
  for (auto& c : picked.candidates)
    c.log_weight = label_logprob(lattice, c.labels);
  std::sort(picked.candidates.begin(), picked.candidates.end(),
            candidate_before);
  return picked;
}

// Uniform subset of n distinct candidates, weights untouched. Relative
// order of the survivors follows the input. n == size returns the input
// as-is; both shortcuts consume no randomness.
inline CandidateSet randomized_subset(const CandidateSet& full, int32_t n,
                                      Rng& rng) {
  if (n < 1) throw ConfigError("subset size must be >= 1");
  const int32_t total = static_cast<int32_t>(full.size());
  if (total < n)
    throw NotEnoughCandidates("subset of " + std::to_string(n) + " from " +
                              std::to_string(total) + " candidates");
  CandidateSet out;
  out.strategy = Strategy::kRandomizedTkm;
  if (total == n) {
    out.candidates = full.candidates;
    return out;
  }
  // Partial Fisher-Yates over the index vector, then restore input order.
  std::vector<int32_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  for (int32_t i = 0; i < n; ++i) {
    int32_t j = i + static_cast<int32_t>(rng.below(total - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  for (int32_t i : idx) out.candidates.push_back(full.candidates[i]);
  return out;
}

}  // namespace ctcmarg
