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

#include <algorithm>
#include <cmath>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "ctcmarg/beam.hpp"
#include "ctcmarg/ctc.hpp"
#include "helpers.hpp"

using namespace ctcmarg;

TEST_CASE("full-width beam reproduces the enumeration ranking") {
  Rng rng(211);
  for (int trial = 0; trial < 25; ++trial) {
    int32_t T = 1 + static_cast<int32_t>(rng.below(4));
    int32_t V = 1 + static_cast<int32_t>(rng.below(2));
    EmissionLattice lat = testutil::random_lattice(T, V, rng);
    auto oracle = testutil::enumerate_by_paths(lat);

    std::vector<Candidate> expect;
    for (const auto& [labels, prob] : oracle)
      expect.push_back(Candidate{labels, std::log(prob)});
    std::sort(expect.begin(), expect.end(), candidate_before);

    CandidateSet got = prefix_beam_search(lat, 4096);
    REQUIRE(got.size() == expect.size());
    for (size_t i = 0; i < expect.size(); ++i) {
      CHECK(got[i].labels == expect[i].labels);
      CHECK(std::exp(got[i].log_weight) ==
            Catch::Approx(std::exp(expect[i].log_weight)).margin(1e-9));
    }
  }
}

TEST_CASE("beam weights are exact lattice scores at any width") {
  Rng rng(223);
  for (int trial = 0; trial < 10; ++trial) {
    EmissionLattice lat = testutil::random_lattice(5, 3, rng);
    CandidateSet got = prefix_beam_search(lat, 3);
    REQUIRE(got.size() == 3);
    for (size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].log_weight ==
            Catch::Approx(label_logprob(lat, got[i].labels)).margin(1e-12));
      if (i > 0) CHECK_FALSE(candidate_before(got[i], got[i - 1]));
    }
    CHECK(got.strategy == Strategy::kTkm);
  }
}

TEST_CASE("beam on a certain lattice returns its one path") {
  EmissionLattice lat(3, 3, 10.0);
  // Point masses spelling label 1, blank, label 0.
  lat.at(0, 1) = 0.0;
  lat.at(1, 2) = 0.0;
  lat.at(2, 0) = 0.0;
  CandidateSet got = prefix_beam_search(lat, 5);
  REQUIRE(got.size() == 1);  // zero-probability candidates never surface
  CHECK(got[0].labels == LabelSeq{1, 0});
  CHECK(got[0].log_weight == 0.0);
}

TEST_CASE("beam handles zero frames and rejects zero width") {
  EmissionLattice lat(0, 3, 10.0);
  CandidateSet got = prefix_beam_search(lat, 8);
  REQUIRE(got.size() == 1);
  CHECK(got[0].labels.empty());
  CHECK(got[0].log_weight == 0.0);
  CHECK_THROWS_AS(prefix_beam_search(lat, 0), ConfigError);
}

TEST_CASE("beam respects lattice support") {
  Rng rng(227);
  for (int trial = 0; trial < 10; ++trial) {
    EmissionLattice lat = testutil::random_lattice(4, 2, rng, 0.4);
    CandidateSet got = prefix_beam_search(lat, 4096);
    auto oracle = testutil::enumerate_by_paths(lat);
    REQUIRE(got.size() == oracle.size());
    for (size_t i = 0; i < got.size(); ++i) {
      REQUIRE(oracle.count(got[i].labels) == 1);
      CHECK(got[i].log_weight > kLogZero);
    }
  }
}
