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

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "ctcmarg/edit_scorer.hpp"
#include "ctcmarg/lattice.hpp"
#include "ctcmarg/rng.hpp"
#include "ctcmarg/vocab.hpp"

namespace testutil {

// Random lattice with exactly normalized rows. zero_frac > 0 knocks out
// states entirely (-inf), re-normalizing over the survivors; the intended
// state of each frame always survives so the lattice keeps full frames.
inline ctcmarg::EmissionLattice random_lattice(int32_t num_frames,
                                               int32_t num_labels,
                                               ctcmarg::Rng& rng,
                                               double zero_frac = 0.0) {
  ctcmarg::EmissionLattice lattice(num_frames, num_labels + 1, 10.0);
  const int32_t S = num_labels + 1;
  for (int32_t t = 0; t < num_frames; ++t) {
    std::vector<double> w(S);
    int32_t keep = static_cast<int32_t>(rng.below(S));
    double total = 0.0;
    for (int32_t s = 0; s < S; ++s) {
      bool dropped = s != keep && rng.uniform01() < zero_frac;
      w[s] = dropped ? 0.0 : 0.05 + rng.uniform01();
      total += w[s];
    }
    for (int32_t s = 0; s < S; ++s)
      lattice.at(t, s) =
          (w[s] == 0.0) ? ctcmarg::kLogZero : std::log(w[s] / total);
  }
  return lattice;
}

// Brute-force CTC reference: walk every alignment, collapse, accumulate
// linear probabilities. Independent of the library's forward recursion.
inline std::map<ctcmarg::LabelSeq, double> enumerate_by_paths(
    const ctcmarg::EmissionLattice& lattice) {
  std::map<ctcmarg::LabelSeq, double> out;
  const int32_t T = lattice.num_frames();
  const int32_t S = lattice.num_states();
  std::vector<int32_t> path(T, 0);
  for (;;) {
    double logp = 0.0;
    for (int32_t t = 0; t < T; ++t) logp += lattice.at(t, path[t]);
    if (logp != ctcmarg::kLogZero) {
      ctcmarg::LabelSeq labels =
          ctcmarg::collapse(path, lattice.blank_index());
      out[labels] += std::exp(logp);
    }
    int32_t t = T - 1;
    while (t >= 0 && path[t] == S - 1) path[t--] = 0;
    if (t < 0) break;
    ++path[t];
  }
  if (T == 0) out[{}] = 1.0;
  return out;
}

// Linear-domain reference for the edit-operation transducer: plain
// recursion over (phonemes consumed, graphemes emitted), local softmaxes
// computed directly from the logits. No logs, no shared code with the
// library's forward pass.
inline double scorer_path_prob(const ctcmarg::ScorerParams& p,
                               const ctcmarg::LabelSeq& h,
                               const ctcmarg::GraphemeSeq& y, size_t j,
                               size_t i) {
  const int32_t C = p.num_symbols;
  const int32_t ins_row = p.insert_row();
  auto op_prob = [&](int32_t k) {
    double total = 0.0;
    for (int32_t o = 0; o < 3; ++o) total += std::exp(p.op_logits[o]);
    return std::exp(p.op_logits[k]) / total;
  };
  auto letters_prob = [&](int32_t row, int32_t g) {
    double total = 0.0;
    for (int32_t c = 0; c + 1 < C; ++c) total += std::exp(p.emit(row, c));
    return std::exp(p.emit(row, g)) / total;
  };
  auto full_prob = [&](int32_t g) {
    double total = 0.0;
    for (int32_t c = 0; c < C; ++c) total += std::exp(p.emit(ins_row, c));
    return std::exp(p.emit(ins_row, g)) / total;
  };
  if (j == h.size()) {
    if (i == y.size()) return full_prob(p.end_col());
    return full_prob(y[i]) * scorer_path_prob(p, h, y, j, i + 1);
  }
  double prob =
      op_prob(ctcmarg::ScorerParams::kDel) * scorer_path_prob(p, h, y, j + 1, i);
  if (i < y.size()) {
    prob += op_prob(ctcmarg::ScorerParams::kSub) * letters_prob(h[j], y[i]) *
            scorer_path_prob(p, h, y, j + 1, i + 1);
    prob += op_prob(ctcmarg::ScorerParams::kIns) * letters_prob(ins_row, y[i]) *
            scorer_path_prob(p, h, y, j, i + 1);
  }
  return prob;
}

inline double scorer_oracle_prob(const ctcmarg::ScorerParams& p,
                                 const ctcmarg::LabelSeq& h,
                                 const ctcmarg::GraphemeSeq& y) {
  return scorer_path_prob(p, h, y, 0, 0);
}

inline ctcmarg::ScorerParams random_params(int32_t num_phonemes,
                                           int32_t num_letters,
                                           ctcmarg::Rng& rng,
                                           double scale = 1.5) {
  ctcmarg::ScorerParams p(num_phonemes, num_letters);
  for (double& v : p.emit_logits) v = (rng.uniform01() * 2.0 - 1.0) * scale;
  for (double& v : p.op_logits) v = (rng.uniform01() * 2.0 - 1.0) * scale;
  return p;
}

// Central finite difference of f along one coordinate.
template <typename F>
double central_diff(F&& f, std::vector<double>& x, size_t i,
                    double step = 1e-5) {
  double keep = x[i];
  x[i] = keep + step;
  double hi = f(x);
  x[i] = keep - step;
  double lo = f(x);
  x[i] = keep;
  return (hi - lo) / (2.0 * step);
}

inline double rel_err(double a, double b) {
  double denom = std::max(std::abs(a) + std::abs(b), 1e-6);
  return std::abs(a - b) / denom;
}

}  // namespace testutil
