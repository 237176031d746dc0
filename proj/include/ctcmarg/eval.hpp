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
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ctcmarg/errors.hpp"
#include "ctcmarg/lattice.hpp"
#include "ctcmarg/rng.hpp"

namespace ctcmarg {

struct EditCounts {
  int64_t distance = 0;
  int64_t substitutions = 0;
  int64_t insertions = 0;
  int64_t deletions = 0;
};

// Unit-cost Levenshtein alignment. Insertions are hypothesis tokens with
// no reference partner, deletions the reverse. When several optimal
// backtraces exist the counts come from the one preferring substitution
// over insertion over deletion, so counts are well defined.
template <typename Seq>
EditCounts edit_distance(const Seq& ref, const Seq& hyp) {
  const size_t R = ref.size();
  const size_t H = hyp.size();
  std::vector<int64_t> dp((R + 1) * (H + 1));
  auto d = [&](size_t i, size_t j) -> int64_t& { return dp[i * (H + 1) + j]; };
  for (size_t i = 0; i <= R; ++i) d(i, 0) = static_cast<int64_t>(i);
  for (size_t j = 0; j <= H; ++j) d(0, j) = static_cast<int64_t>(j);
  for (size_t i = 1; i <= R; ++i) {
    for (size_t j = 1; j <= H; ++j) {
      int64_t sub = d(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      int64_t ins = d(i, j - 1) + 1;
      int64_t del = d(i - 1, j) + 1;
      d(i, j) = std::min(sub, std::min(ins, del));
    }
  }
  EditCounts out;
  out.distance = d(R, H);
  size_t i = R, j = H;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d(i, j) == d(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++out.substitutions;
      --i;
      --j;
    } else if (j > 0 && d(i, j) == d(i, j - 1) + 1) {
      ++out.insertions;
      --j;
    } else {
      ++out.deletions;
      --i;
    }
  }
  return out;
}

struct EvalReport {
  double wer = 0.0;  // fraction, not percent
  int64_t substitutions = 0;
  int64_t insertions = 0;
  int64_t deletions = 0;
  int64_t ref_tokens = 0;
  double rtf = 0.0;
  std::optional<double> p_value;
};

// Micro-averaged word error rate: total errors over total reference
// tokens, which equals the ref-length-weighted mean of utterance rates.
template <typename Seq>
EvalReport corpus_wer(const std::vector<std::pair<Seq, Seq>>& pairs) {
  if (pairs.empty()) throw ConfigError("no utterances to score");
  EvalReport report;
  for (const auto& [ref, hyp] : pairs) {
    EditCounts c = edit_distance(ref, hyp);
    report.substitutions += c.substitutions;
    report.insertions += c.insertions;
    report.deletions += c.deletions;
    report.ref_tokens += static_cast<int64_t>(ref.size());
  }
  if (report.ref_tokens == 0)
    throw EmptyReference("reference corpus holds zero tokens");
  report.wer = static_cast<double>(report.substitutions + report.insertions +
                                   report.deletions) /
               static_cast<double>(report.ref_tokens);
  return report;
}

// Matched-pair bootstrap over per-utterance error-count differences:
// resample utterances with replacement, measure how often the resampled
// mean difference falls on either side of zero, and report the two-sided
// +1-smoothed tail probability (clamped to 1). Identical systems give
// exactly 1.0. Each replica draws from its own derived stream, so the
// result is independent of replica evaluation order.
inline double significance(const std::vector<double>& errors_a,
                           const std::vector<double>& errors_b,
                           uint64_t seed, int32_t num_resamples = 10000) {
  if (errors_a.size() != errors_b.size())
    throw LengthMismatch("systems scored different utterance counts: " +
                         std::to_string(errors_a.size()) + " vs " +
                         std::to_string(errors_b.size()));
  if (errors_a.empty())
    throw LengthMismatch("significance needs at least one utterance");
  if (num_resamples < 1) throw ConfigError("resample count must be >= 1");
  const size_t n = errors_a.size();
  std::vector<double> diff(n);
  for (size_t i = 0; i < n; ++i) diff[i] = errors_a[i] - errors_b[i];

  int64_t non_positive = 0;
  int64_t non_negative = 0;
  for (int32_t b = 0; b < num_resamples; ++b) {
    Rng rng = Rng(seed).child(Rng::mix(0xb007, b));
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) sum += diff[rng.below(n)];
    if (sum <= 0.0) ++non_positive;
    if (sum >= 0.0) ++non_negative;
  }
  double tail = static_cast<double>(std::min(non_positive, non_negative) + 1) /
                static_cast<double>(num_resamples + 1);
  return std::min(1.0, 2.0 * tail);
}

// Wall-clock seconds per second of audio represented by the lattice.
inline double rtf(double decode_wall_seconds, const EmissionLattice& lattice) {
  if (decode_wall_seconds < 0.0)
    throw ConfigError("negative wall time");
  double audio_seconds = lattice.duration_ms() / 1000.0;
  if (audio_seconds <= 0.0)
    throw ZeroDuration("lattice represents zero audio");
  return decode_wall_seconds / audio_seconds;
}

inline double rtf(double decode_wall_seconds, int64_t total_frames,
                  double frame_shift_ms) {
  if (decode_wall_seconds < 0.0)
    throw ConfigError("negative wall time");
  double audio_seconds = total_frames * frame_shift_ms / 1000.0;
  if (audio_seconds <= 0.0)
    throw ZeroDuration("zero audio duration");
  return decode_wall_seconds / audio_seconds;
}

// One header + one row; p_value renders as NA when absent.
inline void write_report_tsv(std::ostream& out, const EvalReport& r) {
  char buf[64];
  out << "wer\tsubstitutions\tinsertions\tdeletions\tref_tokens\trtf\t"
         "p_value\n";
  std::snprintf(buf, sizeof(buf), "%.17g", r.wer);
  out << buf << '\t' << r.substitutions << '\t' << r.insertions << '\t'
      << r.deletions << '\t' << r.ref_tokens << '\t';
  std::snprintf(buf, sizeof(buf), "%.17g", r.rtf);
  out << buf << '\t';
  if (r.p_value) {
    std::snprintf(buf, sizeof(buf), "%.17g", *r.p_value);
    out << buf;
  } else {
    out << "NA";
  }
  out << '\n';
}

inline std::string format_report(const EvalReport& r) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line),
                "WER %.2f%% (sub %lld, ins %lld, del %lld over %lld ref "
                "tokens)\n",
                100.0 * r.wer, static_cast<long long>(r.substitutions),
                static_cast<long long>(r.insertions),
                static_cast<long long>(r.deletions),
                static_cast<long long>(r.ref_tokens));
  out += line;
  std::snprintf(line, sizeof(line), "RTF %.4f\n", r.rtf);
  out += line;
  if (r.p_value) {
    std::snprintf(line, sizeof(line), "p-value %.6g\n", *r.p_value);
    out += line;
  }
  return out;
}

}  // namespace ctcmarg
