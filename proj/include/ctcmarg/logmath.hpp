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
#include <limits>

namespace ctcmarg {

// Log-domain arithmetic. -inf is a first-class value meaning probability
// zero; all helpers must stay correct when either operand is kLogZero.
constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without leaving the log domain.
inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) {
    double t = a;
    a = b;
    b = t;
  }
  return a + std::log1p(std::exp(b - a));
}

// log(sum_i exp(x_i)) over a contiguous range. Empty ranges are log(0).
inline double log_sum_exp(const double* x, int n) {
  double m = kLogZero;
  for (int i = 0; i < n; ++i) {
    if (x[i] > m) m = x[i];
  }
  if (m == kLogZero) return kLogZero;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(x[i] - m);
  return m + std::log(s);
}

template <typename Container>
inline double log_sum_exp(const Container& xs) {
  return log_sum_exp(xs.data(), static_cast<int>(xs.size()));
}

}  // namespace ctcmarg
