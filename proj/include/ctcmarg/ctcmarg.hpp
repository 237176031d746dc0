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

// Umbrella header: the whole library in one include.

#include "ctcmarg/beam.hpp"       // IWYU pragma: export
#include "ctcmarg/candidates.hpp" // IWYU pragma: export
#include "ctcmarg/corpus.hpp"     // IWYU pragma: export
#include "ctcmarg/ctc.hpp"        // IWYU pragma: export
#include "ctcmarg/edit_scorer.hpp" // IWYU pragma: export
#include "ctcmarg/errors.hpp"     // IWYU pragma: export
#include "ctcmarg/eval.hpp"       // IWYU pragma: export
#include "ctcmarg/lattice.hpp"    // IWYU pragma: export
#include "ctcmarg/logmath.hpp"    // IWYU pragma: export
#include "ctcmarg/marginal.hpp"   // IWYU pragma: export
#include "ctcmarg/parallel.hpp"   // IWYU pragma: export
#include "ctcmarg/rng.hpp"        // IWYU pragma: export
#include "ctcmarg/sample.hpp"     // IWYU pragma: export
#include "ctcmarg/synth.hpp"      // IWYU pragma: export
#include "ctcmarg/train.hpp"      // IWYU pragma: export
#include "ctcmarg/vocab.hpp"      // IWYU pragma: export
