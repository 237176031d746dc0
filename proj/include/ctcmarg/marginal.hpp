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
#include <vector>

#include "ctcmarg/beam.hpp"
#include "ctcmarg/candidates.hpp"
#include "ctcmarg/edit_scorer.hpp"
#include "ctcmarg/errors.hpp"
#include "ctcmarg/lattice.hpp"
#include "ctcmarg/logmath.hpp"
#include "ctcmarg/rng.hpp"
#include "ctcmarg/sample.hpp"

namespace ctcmarg {

// How phoneme candidates are produced and combined for one utterance.
struct MarginalConfig {
  Strategy strategy = Strategy::kTkm;
  int32_t K = 8;             // candidate budget (beam width or sample count)
  int32_t n = 4;             // subset size for the randomized strategy
  double temperature = 1.0;  // sampling temperature
  int32_t decode_K = 4;      // candidates that seed the decode pool
  int32_t decode_beam = 8;   // per-candidate hypothesis beam
  bool resample_each_step = true;
  // The sum over candidates is left unnormalized by default, so the
  // objective is a true lower bound on the full marginal. Renormalizing
  // over the candidate set is kept as a switch for comparison runs.
  bool renormalize_weights = false;
  bool keep_duplicate_samples = false;
};

// Deterministic base set for the beam-derived strategies. Sampling-based
// candidates have no reusable base and are drawn per visit.
inline CandidateSet base_candidates(const EmissionLattice& lattice,
                                    const MarginalConfig& config) {
  return prefix_beam_search(lattice, config.K);
}

// One visit's working set. `base` must be the cached base_candidates
// result for the beam-derived strategies and is ignored for sampling.
// The randomized strategy falls back to the full base set when it holds
// fewer than n candidates.
inline CandidateSet draw_candidates(const EmissionLattice& lattice,
                                    const MarginalConfig& config, Rng& rng,
                                    const CandidateSet& base) {
  switch (config.strategy) {
    case Strategy::kTkm:
      return base;
    case Strategy::kRandomizedTkm:
      try {
        return randomized_subset(base, config.n, rng);
      } catch (const NotEnoughCandidates&) {
        CandidateSet all = base;
        all.strategy = Strategy::kRandomizedTkm;
        return all;
      }
    case Strategy::kSkm:
      return skm_sample_candidates(lattice, config.K, config.temperature,
                                   rng, config.keep_duplicate_samples);
  }
  throw ConfigError("unknown candidate strategy");
}

// log sum_k w_k * p(y | h_k), optionally normalized by sum_k w_k.
inline double marginal_logprob(const CandidateSet& set,
                               const ScorerParams& params,
                               const GraphemeSeq& graphemes,
                               bool renormalize = false) {
  if (set.empty()) throw ConfigError("empty candidate set");
  double acc = kLogZero;
  double norm = kLogZero;
  for (const Candidate& c : set.candidates) {
    acc = log_add(acc, c.log_weight +
                           seq_logprob(params, c.labels, graphemes));
    norm = log_add(norm, c.log_weight);
  }
  return renormalize ? acc - norm : acc;
}

// Gradient of marginal_logprob in the flat scorer parameter vector:
// a responsibility-weighted blend of the per-candidate gradients. The
// normalization term has no parameter dependence, so the gradient is the
// same either way. Throws AllImpossible when no candidate can reach the
// grapheme sequence.
inline double marginal_grad(const CandidateSet& set,
                            const ScorerParams& params,
                            const GraphemeSeq& graphemes,
                            std::vector<double>& grad,
                            bool renormalize = false) {
  if (set.empty()) throw ConfigError("empty candidate set");
  const size_t K = set.size();
  std::vector<double> terms(K, kLogZero);
  std::vector<std::vector<double>> grads(K);
  double acc = kLogZero;
  double norm = kLogZero;
  for (size_t k = 0; k < K; ++k) {
    const Candidate& c = set.candidates[k];
    norm = log_add(norm, c.log_weight);
    double s;
    try {
      s = seq_logprob_grad(params, c.labels, graphemes, grads[k]);
    } catch (const ImpossiblePair&) {
      continue;
    }
    terms[k] = c.log_weight + s;
    acc = log_add(acc, terms[k]);
  }
  if (acc == kLogZero)
    throw AllImpossible("no candidate assigns the target nonzero probability");
  grad.assign(params.num_params(), 0.0);
  for (size_t k = 0; k < K; ++k) {
    if (terms[k] == kLogZero) continue;
    double r = std::exp(terms[k] - acc);
    const std::vector<double>& gk = grads[k];
    for (size_t i = 0; i < grad.size(); ++i) grad[i] += r * gk[i];
  }
  return renormalize ? acc - norm : acc;
}

// Two-stage decode: the decode_K heaviest candidates each propose a
// hypothesis beam, and the union is re-scored under the full candidate
// set. Ties break toward the shorter, then lexicographically smaller
// sequence so the result is independent of pool order.
inline ScoredSeq decode(const CandidateSet& set, const ScorerParams& params,
                        int32_t decode_K, int32_t decode_beam,
                        bool renormalize = false) {
  if (set.empty()) throw ConfigError("empty candidate set");
  if (decode_K < 1 || decode_beam < 1)
    throw ConfigError("decode pool sizes must be >= 1");
  std::map<GraphemeSeq, double> pool;
  int32_t seeds = std::min<int32_t>(decode_K,
                                    static_cast<int32_t>(set.size()));
  for (int32_t k = 0; k < seeds; ++k) {
    for (const ScoredSeq& hyp :
         decode_y(params, set.candidates[k].labels, decode_beam)) {
      pool.emplace(hyp.graphemes, kLogZero);
    }
  }
  ScoredSeq best;
  bool have = false;
  for (auto& [y, score] : pool) {
    score = marginal_logprob(set, params, y, renormalize);
    if (!have || score > best.logprob ||
        (score == best.logprob &&
         (y.size() < best.graphemes.size() ||
          (y.size() == best.graphemes.size() && y < best.graphemes)))) {
      best = ScoredSeq{y, score};
      have = true;
    }
  }
  // decode_y always returns at least the empty hypothesis.
  if (!have) throw AllImpossible("decode produced an empty hypothesis pool");
  return best;
}

}  // namespace ctcmarg
