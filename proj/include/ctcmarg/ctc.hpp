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

#include <cstdint>
#include <map>
#include <vector>

#include "ctcmarg/errors.hpp"
#include "ctcmarg/lattice.hpp"
#include "ctcmarg/logmath.hpp"
#include "ctcmarg/vocab.hpp"

namespace ctcmarg {

namespace detail {

inline void check_labels(const LabelSeq& labels, int32_t num_labels) {
  for (int32_t s : labels) {
    if (s < 0 || s >= num_labels)
      throw VocabMismatch("label index " + std::to_string(s) +
                          " outside vocabulary of size " +
                          std::to_string(num_labels));
  }
}

// Frames needed to realize a sequence: one per label plus one separating
// blank between equal neighbours.
inline int32_t min_frames(const LabelSeq& labels) {
  int32_t need = static_cast<int32_t>(labels.size());
  for (size_t i = 1; i < labels.size(); ++i)
    if (labels[i] == labels[i - 1]) ++need;
  return need;
}

}  // namespace detail

// log p(labels | lattice): total log probability of every alignment that
// collapses to `labels`, by the blank-augmented forward recursion over the
// expanded sequence [blank, l1, blank, l2, ..., blank]. Returns -inf when
// the sequence is not representable in num_frames frames. Frames are
// treated as conditionally independent given the alignment.
inline double label_logprob(const EmissionLattice& lattice,
                            const LabelSeq& labels) {
  detail::check_labels(labels, lattice.num_labels());
  const int32_t T = lattice.num_frames();
  const int32_t U = static_cast<int32_t>(labels.size());
  const int32_t blank = lattice.blank_index();
  if (detail::min_frames(labels) > T) return kLogZero;
  if (T == 0) return U == 0 ? 0.0 : kLogZero;

  const int32_t S = 2 * U + 1;  // states: blank at even, labels at odd
  auto state_label = [&](int32_t s) {
    return (s % 2 == 0) ? blank : labels[s / 2];
  };

  std::vector<double> alpha(S, kLogZero), next(S, kLogZero);
  alpha[0] = lattice.at(0, blank);
  if (U > 0) alpha[1] = lattice.at(0, labels[0]);

  for (int32_t t = 1; t < T; ++t) {
    for (int32_t s = 0; s < S; ++s) {
      double acc = log_add(alpha[s], s >= 1 ? alpha[s - 1] : kLogZero);
      // Skip over a blank state, allowed unless it would merge two runs
      // of the same label.
      if (s >= 2 && s % 2 == 1 && labels[s / 2] != labels[s / 2 - 1])
        acc = log_add(acc, alpha[s - 2]);
      next[s] = (acc == kLogZero) ? kLogZero
                                  : acc + lattice.at(t, state_label(s));
    }
    alpha.swap(next);
  }
  double tail = alpha[S - 1];
  if (S >= 2) tail = log_add(tail, alpha[S - 2]);
  return tail;
}

// Exhaustive reference: walk all (V+1)^T alignments, collapse each, and
// accumulate linear probabilities per collapsed sequence. The map orders
// sequences lexicographically, which keeps iteration deterministic.
// budget bounds the number of alignments visited.
inline std::map<LabelSeq, double> enumerate_label_probs(
    const EmissionLattice& lattice, double budget = 1e7) {
  const int32_t T = lattice.num_frames();
  const int32_t N = lattice.num_states();
  double work = 1.0;
  for (int32_t t = 0; t < T; ++t) {
    work *= N;
    if (work > budget)
      throw BudgetExceeded("enumeration needs " + std::to_string(work) +
                           " alignments, budget " + std::to_string(budget));
  }

  std::map<LabelSeq, double> out;
  Alignment alignment(T, 0);
  for (;;) {
    double logp = 0.0;
    for (int32_t t = 0; t < T; ++t) {
      logp += lattice.at(t, alignment[t]);
      if (logp == kLogZero) break;
    }
    if (logp != kLogZero)
      out[collapse(alignment, lattice.blank_index())] += std::exp(logp);

    int32_t t = T - 1;  // odometer step; T == 0 yields the one empty alignment
    while (t >= 0 && alignment[t] == N - 1) alignment[t--] = 0;
    if (t < 0) break;
    ++alignment[t];
  }
  return out;
}

}  // namespace ctcmarg
