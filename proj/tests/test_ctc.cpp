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

#include <cmath>

#include "catch2/catch_amalgamated.hpp"
#include "ctcmarg/ctc.hpp"
#include "helpers.hpp"

using namespace ctcmarg;

TEST_CASE("forward scores match the alignment enumeration oracle") {
  Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    int32_t T = 1 + static_cast<int32_t>(rng.below(5));
    int32_t V = 1 + static_cast<int32_t>(rng.below(3));
    EmissionLattice lat =
        testutil::random_lattice(T, V, rng, trial % 3 == 0 ? 0.25 : 0.0);
    auto oracle = testutil::enumerate_by_paths(lat);
    double total = 0.0;
    for (const auto& [labels, prob] : oracle) {
      double got = std::exp(label_logprob(lat, labels));
      REQUIRE(got == Catch::Approx(prob).margin(1e-9));
      total += prob;
    }
    CHECK(total == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("library enumeration equals the path oracle") {
  Rng rng(103);
  for (int trial = 0; trial < 10; ++trial) {
    EmissionLattice lat = testutil::random_lattice(4, 2, rng, 0.2);
    auto oracle = testutil::enumerate_by_paths(lat);
    auto got = enumerate_label_probs(lat);
    REQUIRE(got.size() == oracle.size());
    for (const auto& [labels, prob] : oracle)
      CHECK(got.at(labels) == Catch::Approx(prob).margin(1e-12));
  }
}

TEST_CASE("empty label sequence equals the all-blank path") {
  Rng rng(107);
  EmissionLattice lat = testutil::random_lattice(4, 2, rng);
  double expect = 0.0;
  for (int32_t t = 0; t < 4; ++t) expect += lat.at(t, lat.blank_index());
  CHECK(label_logprob(lat, {}) == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("zero-frame lattice supports only the empty sequence") {
  EmissionLattice lat(0, 3, 10.0);
  CHECK(label_logprob(lat, {}) == 0.0);
  CHECK(label_logprob(lat, {0}) == kLogZero);
  auto probs = enumerate_label_probs(lat);
  REQUIRE(probs.size() == 1);
  CHECK(probs.at({}) == 1.0);
}

TEST_CASE("sequences needing more frames than available score log zero") {
  Rng rng(109);
  EmissionLattice lat = testutil::random_lattice(2, 2, rng);
  CHECK(label_logprob(lat, {0, 1, 0}) == kLogZero);
  // Adjacent repeats need a separating blank frame.
  CHECK(label_logprob(lat, {0, 0}) == kLogZero);
}

TEST_CASE("adjacent repeat takes exactly one blank-separated path") {
  Rng rng(113);
  EmissionLattice lat = testutil::random_lattice(3, 1, rng);
  double expect =
      lat.at(0, 0) + lat.at(1, lat.blank_index()) + lat.at(2, 0);
  CHECK(label_logprob(lat, {0, 0}) == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("labels outside the lattice vocabulary are rejected") {
  Rng rng(127);
  EmissionLattice lat = testutil::random_lattice(3, 2, rng);
  CHECK_THROWS_AS(label_logprob(lat, {2}), VocabMismatch);   // blank index
  CHECK_THROWS_AS(label_logprob(lat, {-1}), VocabMismatch);
  CHECK_THROWS_AS(label_logprob(lat, {0, 5}), VocabMismatch);
}

TEST_CASE("enumeration enforces its work budget") {
  Rng rng(131);
  EmissionLattice lat = testutil::random_lattice(12, 4, rng);
  CHECK_THROWS_AS(enumerate_label_probs(lat, 1000), BudgetExceeded);
}
