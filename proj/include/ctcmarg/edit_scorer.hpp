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
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "ctcmarg/errors.hpp"
#include "ctcmarg/logmath.hpp"
#include "ctcmarg/vocab.hpp"

namespace ctcmarg {

// Monotonic edit-operation transducer p(graphemes | phonemes).
//
// A path walks a (|h|+1) x (|y|+1) grid. While phonemes remain, the three
// edit operations compete through a shared 3-way softmax:
//   substitute: consume the next phoneme, emit one grapheme drawn from the
//               softmax over that phoneme's emit row (end column excluded);
//   insert:     emit one grapheme from the insert-context row, consume
//               nothing;
//   delete:     consume the next phoneme, emit nothing.
// Once every phoneme is consumed the walk draws from the insert-context
// row's full softmax, end column included: a letter extends the output,
// the end symbol terminates it. Every local choice is a proper
// distribution, so p(.|h) sums to one over grapheme sequences of every
// length.
//
// emit_logits has num_phonemes + 1 rows: one per phoneme (substitution
// context) plus a final insert/termination context row, mirroring the
// blank-last layout of the lattices. Columns follow GraphemeVocab, end
// marker last.
struct ScorerParams {
  int32_t num_contexts = 0;  // phonemes + 1
  int32_t num_symbols = 0;   // letters + end marker
  std::vector<double> emit_logits;  // row-major, num_contexts x num_symbols
  std::array<double, 3> op_logits = {0.0, 0.0, 0.0};  // sub, ins, del
  int32_t version = 1;

  static constexpr int32_t kSub = 0;
  static constexpr int32_t kIns = 1;
  static constexpr int32_t kDel = 2;

  ScorerParams() = default;
  ScorerParams(int32_t num_phonemes, int32_t num_letters)
      : num_contexts(num_phonemes + 1),
        num_symbols(num_letters + 1),
        emit_logits(static_cast<size_t>(num_contexts) * num_symbols, 0.0) {}

  int32_t num_phonemes() const { return num_contexts - 1; }
  int32_t num_letters() const { return num_symbols - 1; }
  int32_t insert_row() const { return num_contexts - 1; }
  int32_t end_col() const { return num_symbols - 1; }

  double emit(int32_t row, int32_t col) const {
    return emit_logits[static_cast<size_t>(row) * num_symbols + col];
  }
  double& emit(int32_t row, int32_t col) {
    return emit_logits[static_cast<size_t>(row) * num_symbols + col];
  }

  // Flat parameter vector: emit logits row-major, then the 3 op logits.
  size_t num_params() const { return emit_logits.size() + 3; }
  size_t emit_param(int32_t row, int32_t col) const {
    return static_cast<size_t>(row) * num_symbols + col;
  }
  size_t op_param(int32_t op) const { return emit_logits.size() + op; }

  void add_scaled(const std::vector<double>& direction, double scale) {
    for (size_t i = 0; i < emit_logits.size(); ++i)
      emit_logits[i] += scale * direction[i];
    for (int32_t k = 0; k < 3; ++k)
      op_logits[k] += scale * direction[emit_logits.size() + k];
  }
};

namespace detail {

// Log-domain local distributions derived from the raw logits.
struct ScorerTables {
  std::array<double, 3> op;          // log softmax over the three ops
  std::vector<double> sub;           // row-major, letters softmax per row
  std::vector<double> ins_full;      // insert row, full softmax
  int32_t num_symbols;

  explicit ScorerTables(const ScorerParams& p) : num_symbols(p.num_symbols) {
    double op_lse = log_sum_exp(p.op_logits.data(), 3);
    for (int32_t k = 0; k < 3; ++k) op[k] = p.op_logits[k] - op_lse;
    // A row whose letter logits are all kLogZero emits nothing; keep the
    // entries at kLogZero instead of normalizing -inf against -inf.
    sub.resize(p.emit_logits.size());
    for (int32_t r = 0; r < p.num_contexts; ++r) {
      const double* row = p.emit_logits.data() +
                          static_cast<size_t>(r) * p.num_symbols;
      double letters_lse = log_sum_exp(row, p.num_symbols - 1);
      for (int32_t c = 0; c < p.num_symbols; ++c)
        sub[static_cast<size_t>(r) * p.num_symbols + c] =
            (letters_lse == kLogZero) ? kLogZero : row[c] - letters_lse;
    }
    const double* irow = p.emit_logits.data() +
                         static_cast<size_t>(p.insert_row()) * p.num_symbols;
    double full_lse = log_sum_exp(irow, p.num_symbols);
    ins_full.resize(p.num_symbols);
    for (int32_t c = 0; c < p.num_symbols; ++c)
      ins_full[c] = (full_lse == kLogZero) ? kLogZero : irow[c] - full_lse;
  }

  double log_sub(int32_t row, int32_t letter) const {
    return sub[static_cast<size_t>(row) * num_symbols + letter];
  }
};

inline void check_pair(const ScorerParams& p, const LabelSeq& labels,
                       const GraphemeSeq& graphemes) {
  for (int32_t s : labels)
    if (s < 0 || s >= p.num_phonemes())
      throw VocabMismatch("phoneme index " + std::to_string(s) +
                          " outside scorer with " +
                          std::to_string(p.num_phonemes()) + " phonemes");
  for (int32_t g : graphemes)
    if (g < 0 || g >= p.num_letters())
      throw VocabMismatch("grapheme index " + std::to_string(g) +
                          " outside scorer with " +
                          std::to_string(p.num_letters()) + " letters");
}

// Forward grid; fwd[(J+1) x (L+1)] row-major by j.
inline void scorer_forward(const ScorerTables& t, const LabelSeq& h,
                           const GraphemeSeq& y, int32_t ins_row,
                           std::vector<double>& fwd) {
  const int32_t J = static_cast<int32_t>(h.size());
  const int32_t L = static_cast<int32_t>(y.size());
  fwd.assign(static_cast<size_t>(J + 1) * (L + 1), kLogZero);
  auto F = [&](int32_t j, int32_t i) -> double& {
    return fwd[static_cast<size_t>(j) * (L + 1) + i];
  };
  F(0, 0) = 0.0;
  for (int32_t j = 0; j <= J; ++j) {
    for (int32_t i = 0; i <= L; ++i) {
      double acc = (j == 0 && i == 0) ? 0.0 : kLogZero;
      if (j > 0)  // delete h[j-1]
        acc = log_add(acc, F(j - 1, i) + t.op[ScorerParams::kDel]);
      if (j > 0 && i > 0)  // substitute h[j-1] -> y[i-1]
        acc = log_add(acc, F(j - 1, i - 1) + t.op[ScorerParams::kSub] +
                               t.log_sub(h[j - 1], y[i - 1]));
      if (i > 0) {  // insert y[i-1]
        double w = (j < J) ? t.op[ScorerParams::kIns] +
                                 t.log_sub(ins_row, y[i - 1])
                           : t.ins_full[y[i - 1]];
        acc = log_add(acc, F(j, i - 1) + w);
      }
      F(j, i) = acc;
    }
  }
}

}  // namespace detail

// log p(graphemes | labels). Always <= 0; -inf only for degenerate
// (saturated) parameters.
inline double seq_logprob(const ScorerParams& params, const LabelSeq& labels,
                          const GraphemeSeq& graphemes) {
  detail::check_pair(params, labels, graphemes);
  detail::ScorerTables t(params);
  std::vector<double> fwd;
  detail::scorer_forward(t, labels, graphemes, params.insert_row(), fwd);
  double end = t.ins_full[params.end_col()];
  return fwd.back() + end;
}

// Exact gradient of seq_logprob with respect to the flat parameter vector,
// by expected edge counts from the forward-backward posteriors. grad must
// have size num_params(); it is overwritten. Returns the log probability.
inline double seq_logprob_grad(const ScorerParams& params,
                               const LabelSeq& labels,
                               const GraphemeSeq& graphemes,
                               std::vector<double>& grad) {
  detail::check_pair(params, labels, graphemes);
  const int32_t J = static_cast<int32_t>(labels.size());
  const int32_t L = static_cast<int32_t>(graphemes.size());
  const int32_t R = params.num_contexts;
  const int32_t C = params.num_symbols;
  const int32_t ins_row = params.insert_row();
  const int32_t end_col = params.end_col();
  detail::ScorerTables t(params);

  std::vector<double> fwd;
  detail::scorer_forward(t, labels, graphemes, ins_row, fwd);
  double total = fwd.back() + t.ins_full[end_col];
  if (total == kLogZero)
    throw ImpossiblePair("pair has zero probability under these parameters");

  // Backward grid: completion mass from each cell.
  std::vector<double> bwd(fwd.size(), kLogZero);
  auto F = [&](int32_t j, int32_t i) {
    return fwd[static_cast<size_t>(j) * (L + 1) + i];
  };
  auto B = [&](int32_t j, int32_t i) -> double& {
    return bwd[static_cast<size_t>(j) * (L + 1) + i];
  };
  B(J, L) = t.ins_full[end_col];
  for (int32_t j = J; j >= 0; --j) {
    for (int32_t i = L; i >= 0; --i) {
      if (j == J && i == L) continue;
      double acc = kLogZero;
      if (j < J)  // delete
        acc = log_add(acc, t.op[ScorerParams::kDel] + B(j + 1, i));
      if (j < J && i < L)  // substitute
        acc = log_add(acc, t.op[ScorerParams::kSub] +
                               t.log_sub(labels[j], graphemes[i]) +
                               B(j + 1, i + 1));
      if (i < L) {  // insert
        double w = (j < J) ? t.op[ScorerParams::kIns] +
                                 t.log_sub(ins_row, graphemes[i])
                           : t.ins_full[graphemes[i]];
        acc = log_add(acc, w + B(j, i + 1));
      }
      B(j, i) = acc;
    }
  }

  // Expected use counts per softmax group.
  std::array<double, 3> op_use = {0.0, 0.0, 0.0};
  std::vector<double> letter_emit(static_cast<size_t>(R) * C, 0.0);
  std::vector<double> letter_use(R, 0.0);
  std::vector<double> full_emit(C, 0.0);
  double full_use = 0.0;

  auto posterior = [&](double f, double w, double b) {
    double lg = f + w + b - total;
    return (lg == kLogZero) ? 0.0 : std::exp(lg);
  };
  for (int32_t j = 0; j <= J; ++j) {
    for (int32_t i = 0; i <= L; ++i) {
      double f = F(j, i);
      if (f == kLogZero) continue;
      if (j < J) {
        double g_del = posterior(f, t.op[ScorerParams::kDel], B(j + 1, i));
        op_use[ScorerParams::kDel] += g_del;
        if (i < L) {
          double w_sub = t.op[ScorerParams::kSub] +
                         t.log_sub(labels[j], graphemes[i]);
          double g_sub = posterior(f, w_sub, B(j + 1, i + 1));
          op_use[ScorerParams::kSub] += g_sub;
          letter_emit[static_cast<size_t>(labels[j]) * C + graphemes[i]] +=
              g_sub;
          letter_use[labels[j]] += g_sub;

          double w_ins = t.op[ScorerParams::kIns] +
                         t.log_sub(ins_row, graphemes[i]);
          double g_ins = posterior(f, w_ins, B(j, i + 1));
          op_use[ScorerParams::kIns] += g_ins;
          letter_emit[static_cast<size_t>(ins_row) * C + graphemes[i]] +=
              g_ins;
          letter_use[ins_row] += g_ins;
        }
      } else {
        if (i < L) {
          double g_ins = posterior(f, t.ins_full[graphemes[i]], B(J, i + 1));
          full_emit[graphemes[i]] += g_ins;
          full_use += g_ins;
        }
      }
    }
  }
  // Terminal draw: every matching path takes it exactly once.
  full_emit[end_col] += 1.0;
  full_use += 1.0;

  grad.assign(params.num_params(), 0.0);
  double op_total = op_use[0] + op_use[1] + op_use[2];
  for (int32_t k = 0; k < 3; ++k)
    grad[params.op_param(k)] = op_use[k] - op_total * std::exp(t.op[k]);
  for (int32_t r = 0; r < R; ++r) {
    if (letter_use[r] == 0.0) continue;
    for (int32_t c = 0; c < C - 1; ++c) {
      grad[params.emit_param(r, c)] +=
          letter_emit[static_cast<size_t>(r) * C + c] -
          letter_use[r] * std::exp(t.log_sub(r, c));
    }
  }
  for (int32_t c = 0; c < C; ++c) {
    grad[params.emit_param(ins_row, c)] +=
        full_emit[c] - full_use * std::exp(t.ins_full[c]);
  }
  return total;
}

// One decoded hypothesis.
struct ScoredSeq {
  GraphemeSeq graphemes;
  double logprob = kLogZero;
};

inline bool scored_before(const ScoredSeq& a, const ScoredSeq& b) {
  if (a.logprob != b.logprob) return a.logprob > b.logprob;
  if (a.graphemes.size() != b.graphemes.size())
    return a.graphemes.size() < b.graphemes.size();
  return a.graphemes < b.graphemes;
}

// Label-synchronous beam over grapheme prefixes. Each prefix carries its
// forward column over phoneme positions; extension is exact, pruning keeps
// the beam_width prefixes with the largest prefix mass. Every visited
// prefix also proposes its terminated completion, and the best beam_width
// completions are returned, re-scored through seq_logprob. With beam_width
// at least the number of sequences up to max_len the result is the exact
// exhaustive ranking.
inline std::vector<ScoredSeq> decode_y(const ScorerParams& params,
                                       const LabelSeq& labels,
                                       int32_t beam_width,
                                       int32_t max_len = -1) {
  detail::check_pair(params, labels, GraphemeSeq{});
  if (beam_width < 1) throw ConfigError("beam width must be >= 1");
  const int32_t J = static_cast<int32_t>(labels.size());
  if (max_len < 0) max_len = 2 * J + 4;
  detail::ScorerTables t(params);
  const int32_t ins_row = params.insert_row();
  const int32_t end_col = params.end_col();
  const double ls_del = t.op[ScorerParams::kDel];

  struct Prefix {
    GraphemeSeq seq;
    std::vector<double> column;  // forward mass per consumed-phoneme count
    double mass = kLogZero;      // logsumexp of column
  };
  auto completed = [&](const std::vector<double>& column) {
    double acc = kLogZero;
    for (int32_t j = 0; j <= J; ++j)
      acc = log_add(acc, column[j] + (J - j) * ls_del);
    return acc + t.ins_full[end_col];
  };

  Prefix root;
  root.seq = {};
  root.column.assign(J + 1, kLogZero);
  root.column[0] = 0.0;
  for (int32_t j = 1; j <= J; ++j)
    root.column[j] = root.column[j - 1] + ls_del;
  root.mass = log_sum_exp(root.column);

  std::vector<ScoredSeq> pool;
  pool.push_back(ScoredSeq{root.seq, completed(root.column)});

  std::vector<Prefix> active{std::move(root)};
  for (int32_t len = 1; len <= max_len && !active.empty(); ++len) {
    std::vector<Prefix> grown;
    grown.reserve(active.size() * (params.num_symbols - 1));
    for (const Prefix& p : active) {
      for (int32_t g = 0; g < params.num_letters(); ++g) {
        Prefix q;
        q.seq = p.seq;
        q.seq.push_back(g);
        q.column.assign(J + 1, kLogZero);
        for (int32_t j = 0; j <= J; ++j) {
          double acc = kLogZero;
          if (j >= 1)
            acc = log_add(acc, p.column[j - 1] + t.op[ScorerParams::kSub] +
                                   t.log_sub(labels[j - 1], g));
          double w_ins = (j < J) ? t.op[ScorerParams::kIns] +
                                       t.log_sub(ins_row, g)
                                 : t.ins_full[g];
          acc = log_add(acc, p.column[j] + w_ins);
          if (j >= 1) acc = log_add(acc, q.column[j - 1] + ls_del);
          q.column[j] = acc;
        }
        q.mass = log_sum_exp(q.column);
        if (q.mass == kLogZero) continue;
        pool.push_back(ScoredSeq{q.seq, completed(q.column)});
        grown.push_back(std::move(q));
      }
    }
    std::sort(grown.begin(), grown.end(), [](const Prefix& a, const Prefix& b) {
      if (a.mass != b.mass) return a.mass > b.mass;
      if (a.seq.size() != b.seq.size()) return a.seq.size() < b.seq.size();
      return a.seq < b.seq;
    });
    if (static_cast<int32_t>(grown.size()) > beam_width)
      grown.resize(beam_width);
    active.swap(grown);
  }

  std::sort(pool.begin(), pool.end(), scored_before);
  if (static_cast<int32_t>(pool.size()) > beam_width)
    pool.resize(beam_width);
  for (auto& h : pool) h.logprob = seq_logprob(params, labels, h.graphemes);
  std::sort(pool.begin(), pool.end(), scored_before);
  return pool;
}

// Flat text round-trip. %.17g keeps doubles bit-exact through the file.
inline void write_scorer_params(std::ostream& out, const ScorerParams& p) {
  char buf[64];
  out << p.num_contexts << ' ' << p.num_symbols << '\n';
  for (int32_t r = 0; r < p.num_contexts; ++r) {
    for (int32_t c = 0; c < p.num_symbols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", p.emit(r, c));
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  }
  for (int32_t k = 0; k < 3; ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", p.op_logits[k]);
    out << (k ? " " : "") << buf;
  }
  out << '\n';
}

inline ScorerParams read_scorer_params(std::istream& in) {
  int32_t rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 2 || cols < 2)
    throw ParseError("scorer params header: expected 'rows cols'");
  ScorerParams p(rows - 1, cols - 1);
  for (int32_t r = 0; r < rows; ++r)
    for (int32_t c = 0; c < cols; ++c)
      if (!(in >> p.emit(r, c)))
        throw ParseError("scorer params truncated in emit row " +
                         std::to_string(r));
  for (int32_t k = 0; k < 3; ++k)
    if (!(in >> p.op_logits[k]))
      throw ParseError("scorer params truncated in op logits");
  for (double v : p.emit_logits)
    if (!std::isfinite(v)) throw ParseError("non-finite emit logit");
  for (double v : p.op_logits)
    if (!std::isfinite(v)) throw ParseError("non-finite op logit");
  return p;
}

}  // namespace ctcmarg
