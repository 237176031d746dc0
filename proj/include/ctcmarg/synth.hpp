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
#include <string>
#include <vector>

#include "ctcmarg/corpus.hpp"
#include "ctcmarg/errors.hpp"
#include "ctcmarg/lattice.hpp"
#include "ctcmarg/rng.hpp"
#include "ctcmarg/vocab.hpp"

namespace ctcmarg {

// One way a grapheme can be pronounced.
struct Rendering {
  LabelSeq phones;
  double prob = 1.0;
};

// Synthetic language + lattice difficulty knobs. Each grapheme carries one
// or two renderings; a second rendering is what makes the mapping
// ambiguous and marginalization over phoneme sequences worth anything.
struct SynthSpec {
  int32_t num_phonemes = 4;
  int32_t num_letters = 4;
  std::vector<std::vector<Rendering>> g2p;  // per letter, 1..2 renderings
  int32_t min_len = 1;
  int32_t max_len = 4;  // inclusive, in graphemes
  int32_t frames_per_phoneme = 2;
  double noise = 0.0;  // in [0, 1)
  double frame_shift_ms = 10.0;
  uint64_t seed = 0;
};

inline void validate_spec(const SynthSpec& spec) {
  if (spec.num_phonemes < 1) throw ConfigError("need at least one phoneme");
  if (spec.num_letters < 1) throw ConfigError("need at least one letter");
  if (static_cast<int32_t>(spec.g2p.size()) != spec.num_letters)
    throw ConfigError("g2p table size does not match letter count");
  for (int32_t g = 0; g < spec.num_letters; ++g) {
    const auto& rs = spec.g2p[g];
    if (rs.empty() || rs.size() > 2)
      throw ConfigError("letter " + std::to_string(g) +
                        " must have 1 or 2 renderings");
    double total = 0.0;
    for (const Rendering& r : rs) {
      if (r.phones.empty())
        throw ConfigError("empty rendering for letter " + std::to_string(g));
      for (int32_t p : r.phones)
        if (p < 0 || p >= spec.num_phonemes)
          throw ConfigError("rendering phoneme out of range");
      if (r.prob < 0.0) throw ConfigError("negative rendering probability");
      total += r.prob;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw ConfigError("rendering probabilities for letter " +
                        std::to_string(g) + " sum to " +
                        std::to_string(total));
  }
  if (spec.min_len < 1 || spec.max_len < spec.min_len)
    throw ConfigError("bad utterance length range");
  if (spec.frames_per_phoneme < 1)
    throw ConfigError("frames per phoneme must be >= 1");
  if (spec.noise < 0.0 || spec.noise >= 1.0)
    throw ConfigError("noise must lie in [0, 1)");
  if (spec.frame_shift_ms <= 0.0)
    throw ConfigError("frame shift must be positive");
}

// Injective letter -> [letter] mapping; needs as many phonemes as letters.
// The resulting language is losslessly invertible.
inline std::vector<std::vector<Rendering>> one_to_one_g2p(
    int32_t num_letters) {
  std::vector<std::vector<Rendering>> g2p(num_letters);
  for (int32_t g = 0; g < num_letters; ++g)
    g2p[g] = {Rendering{{g}, 1.0}};
  return g2p;
}

// First num_ambiguous letters gain a second, longer rendering; the extra
// phoneme wraps around the inventory, so neighboring letters collide on
// their renderings and the grapheme posterior is genuinely multimodal.
inline std::vector<std::vector<Rendering>> ambiguous_g2p(
    int32_t num_phonemes, int32_t num_letters, int32_t num_ambiguous) {
  std::vector<std::vector<Rendering>> g2p(num_letters);
  for (int32_t g = 0; g < num_letters; ++g) {
    int32_t base = g % num_phonemes;
    if (g < num_ambiguous) {
      LabelSeq longer = {base, (base + 1) % num_phonemes};
      g2p[g] = {Rendering{{base}, 0.5}, Rendering{longer, 0.5}};
    } else {
      g2p[g] = {Rendering{{base}, 1.0}};
    }
  }
  return g2p;
}

struct SynthExample {
  GraphemeSeq y_true;
  LabelSeq h_true;
  EmissionLattice lattice;
};

// Noisy lattice for a known phoneme sequence: frames_per_phoneme frames
// per label plus one blank-favored boundary frame between consecutive
// labels (this keeps repeated labels representable after collapse). Each
// frame mixes a point mass on the intended state with a uniform floor and
// is renormalized, so rows are exactly normalized for every noise level.
// The generator draws nothing from rng today; the parameter fixes the
// call shape so per-frame randomness can be added without touching
// callers.
inline EmissionLattice synth_lattice(const LabelSeq& h_true,
                                     const SynthSpec& spec, Rng& rng) {
  (void)rng;
  if (h_true.empty()) throw ConfigError("cannot synthesize an empty layout");
  const int32_t m = static_cast<int32_t>(h_true.size());
  const int32_t V = spec.num_phonemes;
  const int64_t T = static_cast<int64_t>(m) * spec.frames_per_phoneme +
                    (m - 1);
  std::vector<int32_t> intended;
  intended.reserve(T);
  for (int32_t j = 0; j < m; ++j) {
    for (int32_t f = 0; f < spec.frames_per_phoneme; ++f)
      intended.push_back(h_true[j]);
    if (j + 1 < m) intended.push_back(V);  // boundary blank
  }
  EmissionLattice lattice(static_cast<int32_t>(T), V + 1,
                          spec.frame_shift_ms);
  std::vector<double> row(V + 1);
  for (int64_t t = 0; t < T; ++t) {
    double total = 0.0;
    for (int32_t s = 0; s <= V; ++s) {
      row[s] = spec.noise / (V + 1) +
               (s == intended[t] ? 1.0 - spec.noise : 0.0);
      total += row[s];
    }
    for (int32_t s = 0; s <= V; ++s) {
      double p = row[s] / total;
      lattice.at(t, s) = (p == 0.0) ? kLogZero : std::log(p);
    }
  }
  return lattice;
}

// count independent examples, one derived random stream per index, so the
// corpus is reproducible and generation order is irrelevant.
inline std::vector<SynthExample> gen_corpus(const SynthSpec& spec,
                                            int64_t count) {
  validate_spec(spec);
  if (count < 1) throw ConfigError("example count must be >= 1");
  std::vector<SynthExample> out;
  out.reserve(count);
  for (int64_t i = 0; i < count; ++i) {
    Rng rng = Rng(spec.seed).child(Rng::mix(0x5e9d, i));
    int32_t len = spec.min_len +
                  static_cast<int32_t>(rng.below(
                      static_cast<uint64_t>(spec.max_len - spec.min_len + 1)));
    GraphemeSeq y;
    y.reserve(len);
    for (int32_t p = 0; p < len; ++p)
      y.push_back(static_cast<int32_t>(rng.below(spec.num_letters)));
    LabelSeq h;
    for (int32_t g : y) {
      const auto& rs = spec.g2p[g];
      size_t pick = 0;
      if (rs.size() > 1) {
        std::vector<double> probs(rs.size());
        double total = 0.0;
        for (size_t r = 0; r < rs.size(); ++r) {
          probs[r] = rs[r].prob;
          total += probs[r];
        }
        pick = static_cast<size_t>(rng.categorical(probs, total));
      }
      h.insert(h.end(), rs[pick].phones.begin(), rs[pick].phones.end());
    }
    EmissionLattice lattice = synth_lattice(h, spec, rng);
    out.push_back(SynthExample{std::move(y), std::move(h),
                               std::move(lattice)});
  }
  return out;
}

inline std::string synth_utterance_id(int64_t index) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%06lld", static_cast<long long>(index));
  return buf;
}

// Symbol tables for generated languages: phonemes p0, p1, ...; letters
// a..z then g26, g27, ...
inline PhonemeVocab synth_phoneme_vocab(int32_t num_phonemes) {
  std::vector<std::string> syms;
  syms.reserve(num_phonemes);
  for (int32_t i = 0; i < num_phonemes; ++i)
    syms.push_back("p" + std::to_string(i));
  return PhonemeVocab(syms);
}

inline GraphemeVocab synth_grapheme_vocab(int32_t num_letters) {
  std::vector<std::string> syms;
  syms.reserve(num_letters);
  for (int32_t i = 0; i < num_letters; ++i) {
    if (i < 26)
      syms.push_back(std::string(1, static_cast<char>('a' + i)));
    else
      syms.push_back("g" + std::to_string(i));
  }
  return GraphemeVocab(syms);
}

// Full corpus with ids and symbol tables, ready for save_corpus.
inline Corpus build_corpus(const SynthSpec& spec, int64_t count) {
  std::vector<SynthExample> examples = gen_corpus(spec, count);
  Corpus corpus{synth_phoneme_vocab(spec.num_phonemes),
                synth_grapheme_vocab(spec.num_letters),
                {}};
  corpus.utterances.reserve(examples.size());
  for (int64_t i = 0; i < static_cast<int64_t>(examples.size()); ++i) {
    corpus.utterances.push_back(Utterance{synth_utterance_id(i),
                                          std::move(examples[i].lattice),
                                          std::move(examples[i].y_true)});
  }
  return corpus;
}

}  // namespace ctcmarg
