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
#include "sessrec/rules.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "sessrec/math.hpp"

namespace sessrec {

namespace {

struct Accumulators {
  std::vector<std::unordered_map<ItemId, double>> counts;
  std::vector<double> normalizer;
  std::vector<std::int64_t> popularity;

  explicit Accumulators(std::size_t catalog)
      : counts(catalog), normalizer(catalog, 0.0), popularity(catalog, 0) {}
};

std::size_t catalog_size(const std::vector<Session>& train) {
  ItemId max_id = -1;
  for (const auto& s : train) {
    for (const auto& e : s.events) max_id = std::max(max_id, e.item);
  }
  return static_cast<std::size_t>(max_id + 1);
}

void count_popularity(const std::vector<Session>& train, Accumulators& acc) {
  for (const auto& s : train) {
    for (const auto& e : s.events) ++acc.popularity[e.item];
  }
}

RuleTable build_table(Accumulators&& acc) {
  std::vector<std::vector<RuleTable::Rule>> rules(acc.counts.size());
  const RankOrder order{acc.popularity};
  for (std::size_t a = 0; a < acc.counts.size(); ++a) {
    auto& list = rules[a];
    list.reserve(acc.counts[a].size());
    // An antecedent can carry rules while its normalizer is zero (an item
    // only ever seen at ineligible positions); raw weights are kept then.
    // The normalizer is constant per antecedent, so rankings are unchanged.
    const double norm = acc.normalizer[a];
    for (const auto& [item, count] : acc.counts[a]) {
      list.push_back({item, norm > 0.0 ? count / norm : count});
    }
    std::sort(list.begin(), list.end(),
              [&order](const RuleTable::Rule& x, const RuleTable::Rule& y) {
                return order(Scored{x.consequent, x.weight},
                             Scored{y.consequent, y.weight});
              });
  }
  return RuleTable(std::move(rules), std::move(acc.popularity));
}

void require_nonempty(const std::vector<Session>& train, const char* who) {
  if (train.empty()) {
    throw std::invalid_argument(std::string(who) + ": empty training set");
  }
}

}  // namespace

RuleTable fit_ar(const std::vector<Session>& train) {
  require_nonempty(train, "fit_ar");
  Accumulators acc(catalog_size(train));
  count_popularity(train, acc);
  for (const auto& s : train) {
    const auto& ev = s.events;
    const auto len = ev.size();
    for (std::size_t x = 0; x < len; ++x) {
      acc.normalizer[ev[x].item] += static_cast<double>(len - 1);
      for (std::size_t y = 0; y < len; ++y) {
        if (y == x || ev[y].item == ev[x].item) continue;
        acc.counts[ev[x].item][ev[y].item] += 1.0;
      }
    }
  }
  return build_table(std::move(acc));
}

RuleTable fit_mc(const std::vector<Session>& train) {
  require_nonempty(train, "fit_mc");
  Accumulators acc(catalog_size(train));
  count_popularity(train, acc);
  for (const auto& s : train) {
    const auto& ev = s.events;
    for (std::size_t x = 0; x + 1 < ev.size(); ++x) {
      acc.normalizer[ev[x].item] += 1.0;
      acc.counts[ev[x].item][ev[x + 1].item] += 1.0;
    }
  }
  return build_table(std::move(acc));
}

RuleTable fit_sr(const std::vector<Session>& train) {
  require_nonempty(train, "fit_sr");
  Accumulators acc(catalog_size(train));
  count_popularity(train, acc);
  for (const auto& s : train) {
    const auto& ev = s.events;
    // 1-based positions: pairs (y, x) with y < x; consequent at x weighted
    // by 1/(x-y); the antecedent normalizer accumulates x over its own
    // occurrences at positions >= 2.
    for (std::size_t x = 1; x < ev.size(); ++x) {
      acc.normalizer[ev[x].item] += static_cast<double>(x + 1);
      for (std::size_t y = 0; y < x; ++y) {
        acc.counts[ev[y].item][ev[x].item] += 1.0 / static_cast<double>(x - y);
      }
    }
  }
  return build_table(std::move(acc));
}

Ranking rank_rules(const RuleTable& table, std::span<const ItemId> prefix,
                   std::size_t k) {
  if (prefix.empty() || k == 0) return {};
  const auto rules = table.consequents(prefix.back());
  const std::size_t n = std::min(k, rules.size());
  Ranking out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({rules[i].consequent, rules[i].weight});
  }
  return out;
}

void RuleRecommender::fit(const std::vector<Session>& train) {
  switch (kind_) {
    case RuleKind::ar: table_ = fit_ar(train); break;
    case RuleKind::mc: table_ = fit_mc(train); break;
    case RuleKind::sr: table_ = fit_sr(train); break;
  }
}

std::string RuleRecommender::name() const {
  switch (kind_) {
    case RuleKind::ar: return "ar";
    case RuleKind::mc: return "mc";
    case RuleKind::sr: return "sr";
  }
  return "rules";
}

}  // namespace sessrec
