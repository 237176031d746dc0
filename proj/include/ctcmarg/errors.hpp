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

#include <stdexcept>
#include <string>

namespace ctcmarg {

// Base class for all recoverable library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A label or symbol index that does not fit the vocabulary it is used with,
// or two objects built against incompatible vocabularies.
class VocabMismatch : public Error {
 public:
  explicit VocabMismatch(const std::string& msg) : Error(msg) {}
};

// apply_temperature with temperature <= 0.
class NonPositiveTemperature : public Error {
 public:
  explicit NonPositiveTemperature(const std::string& msg) : Error(msg) {}
};

// Exhaustive enumeration would exceed the configured state budget.
class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(const std::string& msg) : Error(msg) {}
};

// randomized_subset asked for more candidates than the set holds.
// Callers are expected to fall back to the full set.
class NotEnoughCandidates : public Error {
 public:
  explicit NotEnoughCandidates(const std::string& msg) : Error(msg) {}
};

// Gradient requested for a pair whose log probability is -inf.
class ImpossiblePair : public Error {
 public:
  explicit ImpossiblePair(const std::string& msg) : Error(msg) {}
};

// Every candidate in a set scores -inf against the target.
class AllImpossible : public Error {
 public:
  explicit AllImpossible(const std::string& msg) : Error(msg) {}
};

// Malformed input file.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Inconsistent or out-of-range run configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Word error rate over a corpus whose references hold zero tokens.
class EmptyReference : public Error {
 public:
  explicit EmptyReference(const std::string& msg) : Error(msg) {}
};

// Paired significance test fed systems with different utterance counts.
class LengthMismatch : public Error {
 public:
  explicit LengthMismatch(const std::string& msg) : Error(msg) {}
};

// Real-time factor of an utterance with zero audio duration.
class ZeroDuration : public Error {
 public:
  explicit ZeroDuration(const std::string& msg) : Error(msg) {}
};

}  // namespace ctcmarg
