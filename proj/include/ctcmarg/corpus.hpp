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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ctcmarg/errors.hpp"
#include "ctcmarg/lattice.hpp"
#include "ctcmarg/vocab.hpp"

namespace ctcmarg {

// One utterance: a phoneme emission lattice and its grapheme reference.
struct Utterance {
  std::string id;
  EmissionLattice lattice;
  GraphemeSeq reference;
};

struct Corpus {
  PhonemeVocab phonemes;
  GraphemeVocab graphemes;
  std::vector<Utterance> utterances;
};

// On-disk layout under a corpus directory:
//   vocab.tsv       lines "P\t<phoneme>" then "G\t<letter>", in index order
//   manifest.tsv    lines "<id>\t<num_frames>\t<ref length>"
//   <id>.lat        emission lattice (see lattice.hpp)
//   <id>.ref        one line of space-separated reference letters
inline void save_corpus(const std::filesystem::path& dir,
                        const Corpus& corpus) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream vocab(dir / "vocab.tsv");
    for (int32_t i = 0; i < corpus.phonemes.size(); ++i)
      vocab << "P\t" << corpus.phonemes.symbol(i) << '\n';
    for (int32_t i = 0; i < corpus.graphemes.num_letters(); ++i)
      vocab << "G\t" << corpus.graphemes.symbol(i) << '\n';
  }
  std::ofstream manifest(dir / "manifest.tsv");
  for (const Utterance& utt : corpus.utterances) {
    manifest << utt.id << '\t' << utt.lattice.num_frames() << '\t'
             << utt.reference.size() << '\n';
    std::ofstream lat(dir / (utt.id + ".lat"));
    write_lattice(lat, utt.lattice);
    std::ofstream ref(dir / (utt.id + ".ref"));
    ref << join_symbols(utt.reference, corpus.graphemes) << '\n';
  }
}

inline Corpus load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::ifstream vocab_in(dir / "vocab.tsv");
  if (!vocab_in)
    throw ParseError("cannot open " + (dir / "vocab.tsv").string());
  std::vector<std::string> phones;
  std::vector<std::string> letters;
  std::string line;
  while (std::getline(vocab_in, line)) {
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab + 1 >= line.size())
      throw ParseError("vocab.tsv: malformed line '" + line + "'");
    std::string kind = line.substr(0, tab);
    std::string sym = line.substr(tab + 1);
    if (kind == "P")
      phones.push_back(sym);
    else if (kind == "G")
      letters.push_back(sym);
    else
      throw ParseError("vocab.tsv: unknown row kind '" + kind + "'");
  }
  Corpus corpus{PhonemeVocab(phones), GraphemeVocab(letters), {}};

  std::ifstream manifest(dir / "manifest.tsv");
  if (!manifest)
    throw ParseError("cannot open " + (dir / "manifest.tsv").string());
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id;
    int64_t frames = -1, ref_len = -1;
    if (!std::getline(row, id, '\t') || !(row >> frames >> ref_len))
      throw ParseError("manifest.tsv: malformed line '" + line + "'");
    std::string lat_name = id + ".lat";
    std::string ref_name = id + ".ref";
    std::ifstream lat(dir / lat_name);
    if (!lat) throw ParseError("cannot open " + (dir / lat_name).string());
    EmissionLattice lattice = read_lattice(lat);
    if (lattice.num_labels() != corpus.phonemes.size())
      throw VocabMismatch("lattice " + lat_name + " has " +
                          std::to_string(lattice.num_labels()) +
                          " labels, vocab has " +
                          std::to_string(corpus.phonemes.size()));
    std::ifstream ref(dir / ref_name);
    if (!ref) throw ParseError("cannot open " + (dir / ref_name).string());
    std::string ref_line;
    std::getline(ref, ref_line);
    GraphemeSeq reference = parse_symbols(ref_line, corpus.graphemes);
    if (lattice.num_frames() != frames ||
        static_cast<int64_t>(reference.size()) != ref_len)
      throw ParseError("manifest.tsv: stale row for " + id);
    corpus.utterances.push_back(
        Utterance{id, std::move(lattice), std::move(reference)});
  }
  return corpus;
}

}  // namespace ctcmarg
