/*
 * Copyright 2026 The sessrec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sessrec/types.hpp"

namespace sessrec {

/// Numerically stable logistic function, exact saturation for |x| >= ~745.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// d/dx sigmoid(x), computed from the function value.
inline double sigmoid_grad(double s) { return s * (1.0 - s); }

/// Softmax with max-subtraction stabilization. Throws on empty input.
std::vector<double> softmax(std::span<const double> scores);

/// In-place softmax over a scratch buffer, same semantics as softmax().
void softmax_inplace(std::vector<double>& scores);

/// Deterministic total order for recommendation lists: score descending,
/// then training popularity descending, then item id ascending.
/// `popularity[item]` holds training occurrence counts; items beyond the
/// span count as zero.
struct RankOrder {
  std::span<const std::int64_t> popularity;

  std::int64_t pop(ItemId i) const {
    return static_cast<std::size_t>(i) < popularity.size() ? popularity[i] : 0;
  }

  bool operator()(const Scored& a, const Scored& b) const {
    if (a.score != b.score) return a.score > b.score;
    const std::int64_t pa = pop(a.item), pb = pop(b.item);
    if (pa != pb) return pa > pb;
    return a.item < b.item;
  }
};

/// Sorts candidates under RankOrder and truncates to k. Consumes the
/// candidate buffer.
Ranking top_k_ranking(std::vector<Scored>&& candidates, std::size_t k,
                      std::span<const std::int64_t> popularity);

}  // namespace sessrec
