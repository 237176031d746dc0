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
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ctcmarg/errors.hpp"

namespace ctcmarg {

// A phoneme sequence with no blanks in it.
using LabelSeq = std::vector<int32_t>;

// A per-frame state sequence over [0, V]; state V is the blank.
using Alignment = std::vector<int32_t>;

// A grapheme sequence; the end marker never appears inside one.
using GraphemeSeq = std::vector<int32_t>;

// Phoneme inventory. The blank is not listed as a symbol; it always sits at
// index V = symbols.size(), one past the last phoneme, matching the lattice
// column layout (blank last).
class PhonemeVocab {
 public:
  PhonemeVocab() = default;
  explicit PhonemeVocab(std::vector<std::string> symbols)
      : symbols_(std::move(symbols)) {
    std::set<std::string> seen;
    for (const auto& s : symbols_) {
      if (s.empty()) throw VocabMismatch("empty phoneme symbol");
      if (!seen.insert(s).second)
        throw VocabMismatch("duplicate phoneme symbol: " + s);
    }
  }

  int32_t size() const { return static_cast<int32_t>(symbols_.size()); }
  int32_t blank_index() const { return size(); }
  int32_t num_states() const { return size() + 1; }  // phonemes + blank

  const std::string& symbol(int32_t i) const { return symbols_.at(i); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  int32_t index_of(const std::string& s) const {
    for (int32_t i = 0; i < size(); ++i)
      if (symbols_[i] == s) return i;
    throw VocabMismatch("unknown phoneme symbol: " + s);
  }

 private:
  std::vector<std::string> symbols_;
};

// Grapheme inventory. The last symbol is a reserved end-of-sequence marker;
// it exists as a model event (sequence termination) and is never a legal
// member of a GraphemeSeq.
class GraphemeVocab {
 public:
  static constexpr const char* kEndSymbol = "</s>";

  GraphemeVocab() = default;

  // letters: the usable graphemes; the end marker is appended internally.
  explicit GraphemeVocab(std::vector<std::string> letters) {
    std::set<std::string> seen;
    for (const auto& s : letters) {
      if (s.empty()) throw VocabMismatch("empty grapheme symbol");
      if (s == kEndSymbol)
        throw VocabMismatch("end marker cannot be a plain grapheme");
      if (!seen.insert(s).second)
        throw VocabMismatch("duplicate grapheme symbol: " + s);
    }
    symbols_ = std::move(letters);
    symbols_.push_back(kEndSymbol);
  }

  // All symbols including the end marker.
  int32_t size() const { return static_cast<int32_t>(symbols_.size()); }
  int32_t end_index() const { return size() - 1; }
  // Graphemes usable inside sequences.
  int32_t num_letters() const { return size() - 1; }

  const std::string& symbol(int32_t i) const { return symbols_.at(i); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  int32_t index_of(const std::string& s) const {
    for (int32_t i = 0; i < size(); ++i)
      if (symbols_[i] == s) return i;
    throw VocabMismatch("unknown grapheme symbol: " + s);
  }

 private:
  std::vector<std::string> symbols_;
};

// CTC collapse: merge adjacent equal non-blank states, drop blanks.
// A blank separates two runs of the same phoneme, so [a - a] keeps both.
inline LabelSeq collapse(const Alignment& alignment, int32_t blank_index) {
  LabelSeq out;
  int32_t prev = -1;
  for (int32_t s : alignment) {
    if (s != blank_index && s != prev) out.push_back(s);
    prev = s;
  }
  return out;
}

inline LabelSeq collapse(const Alignment& alignment,
                         const PhonemeVocab& vocab) {
  for (int32_t s : alignment) {
    if (s < 0 || s > vocab.blank_index())
      throw VocabMismatch("alignment state out of range");
  }
  return collapse(alignment, vocab.blank_index());
}

// Space-joined symbol rendering used by every text interface.
template <typename Vocab>
inline std::string join_symbols(const std::vector<int32_t>& seq,
                                const Vocab& vocab) {
  std::string out;
  for (size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += vocab.symbol(seq[i]);
  }
  return out;
}

template <typename Vocab>
inline std::vector<int32_t> parse_symbols(const std::string& text,
                                          const Vocab& vocab) {
  std::vector<int32_t> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(vocab.index_of(tok));
  return out;
}

}  // namespace ctcmarg
