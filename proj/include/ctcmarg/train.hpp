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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <vector>

#include "ctcmarg/corpus.hpp"
#include "ctcmarg/errors.hpp"
#include "ctcmarg/marginal.hpp"
#include "ctcmarg/parallel.hpp"
#include "ctcmarg/rng.hpp"

namespace ctcmarg {

struct SgdConfig {
  double lr = 0.05;
  int32_t batch_size = 8;
  int32_t num_steps = 1000;
  double clip_norm = 5.0;  // global L2 clip on the batch gradient
  int32_t log_every = 10;
  int32_t num_workers = 1;
};

struct TrainRecord {
  int64_t step = 0;
  double loss = 0.0;     // mean negative log marginal over the batch
  double wall_ms = 0.0;  // elapsed since training started
  int32_t skipped = 0;   // batch items no candidate could explain
};

struct TrainResult {
  std::vector<TrainRecord> records;
  int64_t skipped_total = 0;
};

// Maximizes the candidate-marginal log likelihood by minibatch gradient
// ascent. Utterances are visited in a per-epoch shuffled order; batches
// wrap across epoch boundaries. Candidate sets follow the strategy rules:
// the deterministic beam set is built once per utterance and cached, the
// randomized strategies redraw on every visit (or reuse their first draw
// when resample_each_step is off). Every random draw comes from a stream
// keyed on (seed, utterance, visit), so results do not depend on worker
// count or batch layout.
inline TrainResult train(const std::vector<Utterance>& utterances,
                         ScorerParams& params, const MarginalConfig& mcfg,
                         const SgdConfig& scfg, uint64_t seed) {
  if (utterances.empty()) throw ConfigError("training set is empty");
  if (scfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (scfg.num_steps < 0) throw ConfigError("step count must be >= 0");
  if (scfg.lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (scfg.clip_norm <= 0.0) throw ConfigError("clip norm must be positive");

  const size_t N = utterances.size();
  const size_t P = params.num_params();
  const bool needs_base = mcfg.strategy != Strategy::kSkm;

  std::vector<CandidateSet> base(needs_base ? N : 0);
  if (needs_base) {
    parallel_for(static_cast<int64_t>(N), scfg.num_workers, [&](int64_t u) {
      base[u] = base_candidates(utterances[u].lattice, mcfg);
    });
  }
  // Frozen-candidate runs fix each utterance's first draw up front (the
  // stream a first visit would use) so the batch loop never mutates
  // shared state.
  const bool frozen_mode =
      !mcfg.resample_each_step && mcfg.strategy != Strategy::kTkm;
  std::vector<CandidateSet> frozen(frozen_mode ? N : 0);
  if (frozen_mode) {
    parallel_for(static_cast<int64_t>(N), scfg.num_workers, [&](int64_t u) {
      Rng draw = Rng(seed).child(Rng::mix(static_cast<uint64_t>(u), 0));
      frozen[u] = draw_candidates(utterances[u].lattice, mcfg, draw,
                                  needs_base ? base[u] : CandidateSet{});
    });
  }

  std::vector<size_t> order(N);
  std::vector<int64_t> visits(N, 0);
  size_t cursor = N;  // forces a shuffle before the first batch
  int64_t epoch = -1;
  auto next_index = [&]() {
    if (cursor >= N) {
      ++epoch;
      Rng shuffle = Rng(seed).child(Rng::mix(0x0e90c5u, epoch));
      for (size_t i = 0; i < N; ++i) order[i] = i;
      for (size_t i = N; i > 1; --i) {
        uint64_t j = shuffle.below(i);
        std::swap(order[i - 1], order[j]);
      }
      cursor = 0;
    }
    return order[cursor++];
  };

  TrainResult result;
  auto t0 = std::chrono::steady_clock::now();
  std::vector<double> item_logp(scfg.batch_size);
  std::vector<std::vector<double>> item_grad(scfg.batch_size);
  std::vector<char> item_ok(scfg.batch_size);
  std::vector<size_t> batch(scfg.batch_size);
  std::vector<int64_t> batch_visit(scfg.batch_size);

  for (int64_t step = 1; step <= scfg.num_steps; ++step) {
    for (int32_t b = 0; b < scfg.batch_size; ++b) {
      batch[b] = next_index();
      batch_visit[b] = visits[batch[b]]++;
    }
    parallel_for(scfg.batch_size, scfg.num_workers, [&](int64_t b) {
      size_t u = batch[b];
      const Utterance& utt = utterances[u];
      CandidateSet set;
      if (mcfg.strategy == Strategy::kTkm) {
        set = base[u];
      } else if (frozen_mode) {
        set = frozen[u];
      } else {
        Rng draw = Rng(seed).child(
            Rng::mix(static_cast<uint64_t>(u),
                     static_cast<uint64_t>(batch_visit[b])));
        set = draw_candidates(utt.lattice, mcfg, draw,
                              needs_base ? base[u] : CandidateSet{});
      }
      try {
        item_logp[b] = marginal_grad(set, params, utt.reference,
                                     item_grad[b], mcfg.renormalize_weights);
        item_ok[b] = 1;
      } catch (const AllImpossible&) {
        item_ok[b] = 0;
      }
    });

    std::vector<double> grad(P, 0.0);
    double loss = 0.0;
    int32_t valid = 0;
    int32_t skipped = 0;
    for (int32_t b = 0; b < scfg.batch_size; ++b) {
      if (!item_ok[b]) {
        ++skipped;
        continue;
      }
      ++valid;
      loss -= item_logp[b];
      for (size_t i = 0; i < P; ++i) grad[i] += item_grad[b][i];
    }
    result.skipped_total += skipped;
    if (valid > 0) {
      loss /= valid;
      double norm_sq = 0.0;
      for (size_t i = 0; i < P; ++i) {
        grad[i] /= valid;
        norm_sq += grad[i] * grad[i];
      }
      double norm = std::sqrt(norm_sq);
      double scale = (norm > scfg.clip_norm) ? scfg.clip_norm / norm : 1.0;
      params.add_scaled(grad, scfg.lr * scale);
    } else {
      loss = std::numeric_limits<double>::infinity();
    }

    if (step % scfg.log_every == 0 || step == scfg.num_steps || step == 1) {
      double wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
      result.records.push_back(TrainRecord{step, loss, wall_ms, skipped});
    }
  }
  return result;
}

// CSV rendering of the loss trace. Loss is printed with full precision so
// identical runs produce identical files; wall_ms is the one field that
// legitimately differs between runs.
inline void write_loss_csv(std::ostream& out,
                           const std::vector<TrainRecord>& records) {
  out << "step,loss,wall_ms\n";
  char buf[64];
  for (const TrainRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.loss);
    out << r.step << ',' << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.3f", r.wall_ms);
    out << buf << '\n';
  }
}

}  // namespace ctcmarg
