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
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ctcmarg/errors.hpp"
#include "ctcmarg/logmath.hpp"

namespace ctcmarg {

// Per-frame posterior log probabilities over V phonemes plus the blank.
// Row layout: columns 0..V-1 are phonemes, column V is the blank.
// Entries of -inf are legal (a state the frame rules out entirely);
// NaN and +inf are not. Every row must normalize: logsumexp(row) == 0
// within kRowTolerance.
class EmissionLattice {
 public:
  static constexpr double kRowTolerance = 1e-6;

  EmissionLattice() = default;
  EmissionLattice(int32_t num_frames, int32_t num_states,
                  double frame_shift_ms)
      : num_frames_(num_frames),
        num_states_(num_states),
        frame_shift_ms_(frame_shift_ms),
        log_probs_(static_cast<size_t>(num_frames) * num_states, kLogZero) {}

  int32_t num_frames() const { return num_frames_; }
  int32_t num_states() const { return num_states_; }  // V + 1
  int32_t num_labels() const { return num_states_ - 1; }
  int32_t blank_index() const { return num_states_ - 1; }
  double frame_shift_ms() const { return frame_shift_ms_; }
  double duration_ms() const { return num_frames_ * frame_shift_ms_; }

  double at(int32_t frame, int32_t state) const {
    return log_probs_[static_cast<size_t>(frame) * num_states_ + state];
  }
  double& at(int32_t frame, int32_t state) {
    return log_probs_[static_cast<size_t>(frame) * num_states_ + state];
  }
  const double* row(int32_t frame) const {
    return log_probs_.data() + static_cast<size_t>(frame) * num_states_;
  }
  double* row(int32_t frame) {
    return log_probs_.data() + static_cast<size_t>(frame) * num_states_;
  }

 private:
  int32_t num_frames_ = 0;
  int32_t num_states_ = 0;
  double frame_shift_ms_ = 10.0;
  std::vector<double> log_probs_;
};

// One concrete validation failure.
struct LatticeIssue {
  enum Kind { kRowNotNormalized, kNonFiniteEntry };
  Kind kind;
  int32_t frame = -1;
  int32_t index = -1;      // column, for kNonFiniteEntry
  double deviation = 0.0;  // |logsumexp(row)|, for kRowNotNormalized

  std::string describe() const {
    char buf[128];
    if (kind == kNonFiniteEntry) {
      std::snprintf(buf, sizeof(buf), "non-finite entry at frame %d index %d",
                    frame, index);
    } else {
      std::snprintf(buf, sizeof(buf),
                    "row %d not normalized, |logsumexp| = %.3g", frame,
                    deviation);
    }
    return buf;
  }
};

// Returns the first violated invariant, or nullopt when the lattice is
// well-formed. NaN and +inf entries are rejected; -inf is allowed.
inline std::optional<LatticeIssue> validate_lattice(
    const EmissionLattice& lattice) {
  for (int32_t t = 0; t < lattice.num_frames(); ++t) {
    const double* r = lattice.row(t);
    for (int32_t s = 0; s < lattice.num_states(); ++s) {
      if (std::isnan(r[s]) || r[s] == std::numeric_limits<double>::infinity())
        return LatticeIssue{LatticeIssue::kNonFiniteEntry, t, s, 0.0};
    }
    double lse = log_sum_exp(r, lattice.num_states());
    double dev = (lse == kLogZero) ? std::numeric_limits<double>::infinity()
                                   : std::fabs(lse);
    if (!(dev <= EmissionLattice::kRowTolerance))
      return LatticeIssue{LatticeIssue::kRowNotNormalized, t, -1, dev};
  }
  return std::nullopt;
}

inline void require_valid(const EmissionLattice& lattice) {
  if (auto issue = validate_lattice(lattice))
    throw ParseError("invalid lattice: " + issue->describe());
}

// Row-wise temperature: row' = row / T - logsumexp(row / T). In the linear
// domain this is p^(1/T) renormalized. T = 1 reproduces the input up to
// rounding; large T flattens every row toward uniform over its support.
inline EmissionLattice apply_temperature(const EmissionLattice& lattice,
                                         double temperature) {
  if (!(temperature > 0.0))
    throw NonPositiveTemperature("temperature must be > 0, got " +
                                 std::to_string(temperature));
  EmissionLattice out(lattice.num_frames(), lattice.num_states(),
                      lattice.frame_shift_ms());
  std::vector<double> scaled(lattice.num_states());
  for (int32_t t = 0; t < lattice.num_frames(); ++t) {
    const double* src = lattice.row(t);
    for (int32_t s = 0; s < lattice.num_states(); ++s)
      scaled[s] = src[s] / temperature;
    double lse = log_sum_exp(scaled);
    double* dst = out.row(t);
    for (int32_t s = 0; s < lattice.num_states(); ++s) {
      dst[s] = (scaled[s] == kLogZero) ? kLogZero : scaled[s] - lse;
    }
  }
  return out;
}

// Text format, one lattice per file:
//   line 1:  num_frames V frame_shift_ms
//   then num_frames lines of V+1 log probabilities, blank last.
inline void write_lattice(std::ostream& out, const EmissionLattice& lattice) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", lattice.frame_shift_ms());
  out << lattice.num_frames() << ' ' << lattice.num_labels() << ' ' << buf
      << '\n';
  for (int32_t t = 0; t < lattice.num_frames(); ++t) {
    const double* r = lattice.row(t);
    for (int32_t s = 0; s < lattice.num_states(); ++s) {
      std::snprintf(buf, sizeof(buf), "%.17g", r[s]);
      out << (s ? " " : "") << buf;
    }
    out << '\n';
  }
}

inline EmissionLattice read_lattice(std::istream& in) {
  int64_t num_frames = 0, num_labels = 0;
  double shift = 0.0;
  if (!(in >> num_frames >> num_labels >> shift))
    throw ParseError("lattice header: expected 'num_frames V frame_shift_ms'");
  if (num_frames < 0 || num_labels < 0 || !(shift > 0.0))
    throw ParseError("lattice header out of range");
  EmissionLattice lattice(static_cast<int32_t>(num_frames),
                          static_cast<int32_t>(num_labels) + 1, shift);
  for (int32_t t = 0; t < lattice.num_frames(); ++t) {
    for (int32_t s = 0; s < lattice.num_states(); ++s) {
      std::string tok;
      if (!(in >> tok))
        throw ParseError("lattice truncated at frame " + std::to_string(t));
      if (tok == "-inf" || tok == "-Inf" || tok == "-INF") {
        lattice.at(t, s) = kLogZero;
      } else {
        try {
          size_t pos = 0;
          lattice.at(t, s) = std::stod(tok, &pos);
          if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
          throw ParseError("bad lattice entry '" + tok + "'");
        }
      }
    }
  }
  require_valid(lattice);
  return lattice;
}

}  // namespace ctcmarg
