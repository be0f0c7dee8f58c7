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
#include "sessrec/math.hpp"

#include <algorithm>
#include <stdexcept>

namespace sessrec {

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) {
    throw std::invalid_argument("softmax: empty input");
  }
  std::vector<double> out(scores.begin(), scores.end());
  softmax_inplace(out);
  return out;
}

void softmax_inplace(std::vector<double>& scores) {
  if (scores.empty()) {
    throw std::invalid_argument("softmax: empty input");
  }
  const double mx = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - mx);
    sum += s;
  }
  for (double& s : scores) s /= sum;
}

Ranking top_k_ranking(std::vector<Scored>&& candidates, std::size_t k,
                      std::span<const std::int64_t> popularity) {
  const RankOrder order{popularity};
  const std::size_t n = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + n,
                    candidates.end(), order);
  candidates.resize(n);
  return std::move(candidates);
}

}  // namespace sessrec
