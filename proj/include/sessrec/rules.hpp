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

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "sessrec/types.hpp"

namespace sessrec {

/// Pairwise rules built in one pass over the training data: for each
/// antecedent item a sorted list of (consequent, weight). Weights are
/// normalized per antecedent; the normalizer is constant per antecedent,
/// so the induced ranking equals the ranking of raw counts.
class RuleTable {
 public:
  struct Rule {
    ItemId consequent;
    double weight;
  };

  RuleTable() = default;
  RuleTable(std::vector<std::vector<Rule>> rules,
            std::vector<std::int64_t> popularity)
      : rules_(std::move(rules)), popularity_(std::move(popularity)) {}

  std::span<const Rule> consequents(ItemId antecedent) const {
    if (antecedent < 0 ||
        static_cast<std::size_t>(antecedent) >= rules_.size()) {
      return {};
    }
    return rules_[antecedent];
  }

  std::span<const std::int64_t> popularity() const { return popularity_; }
  std::size_t catalog_size() const { return rules_.size(); }

  std::size_t memory_bytes() const {
    std::size_t bytes = rules_.capacity() * sizeof(rules_[0]) +
                        popularity_.capacity() * sizeof(std::int64_t);
    for (const auto& r : rules_) bytes += r.capacity() * sizeof(Rule);
    return bytes;
  }

 private:
  std::vector<std::vector<Rule>> rules_;  // indexed by antecedent
  std::vector<std::int64_t> popularity_;
};

/// Co-occurrence rules of size two over unordered distinct-position pairs
/// within a session. Self-rules (consequent == antecedent) are excluded.
RuleTable fit_ar(const std::vector<Session>& train);

/// First-order transition counts between subsequent events, normalized to
/// transition probabilities per antecedent.
RuleTable fit_mc(const std::vector<Session>& train);

/// Ordered-pair rules with step-distance weight 1/(x-y) accumulated over
/// every (earlier, later) position pair within a session.
RuleTable fit_sr(const std::vector<Session>& train);

/// Top-k consequents of the prefix's last item. Unknown antecedent or
/// empty prefix yields an empty ranking.
Ranking rank_rules(const RuleTable& table, std::span<const ItemId> prefix,
                   std::size_t k);

enum class RuleKind { ar, mc, sr };

class RuleRecommender final : public Recommender {
 public:
  explicit RuleRecommender(RuleKind kind) : kind_(kind) {}

  void fit(const std::vector<Session>& train) override;
  Ranking rank(std::span<const ItemId> prefix, std::size_t k) const override {
    return rank_rules(table_, prefix, k);
  }
  std::size_t memory_bytes() const override { return table_.memory_bytes(); }
  std::string name() const override;

  const RuleTable& table() const { return table_; }

 private:
  RuleKind kind_;
  RuleTable table_;
};

}  // namespace sessrec
