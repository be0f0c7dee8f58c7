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
#include <limits>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "sessrec/types.hpp"

namespace sessrec {

constexpr std::size_t kAllNeighbors = std::numeric_limits<std::size_t>::max();

/// Pre-computed in-memory lookup structures shared by all neighbor
/// variants: an inverted item -> sessions index (recency-ordered), binary
/// per-session item sets, and the table of directly-adjacent item pairs.
/// Immutable after fit; all queries are re-entrant.
class SessionIndex {
 public:
  explicit SessionIndex(const std::vector<Session>& train);

  std::size_t session_count() const { return session_items_.size(); }
  std::size_t catalog_size() const { return item_sessions_.size(); }

  /// Sorted distinct items of a training session.
  std::span<const ItemId> items_of(std::uint32_t session) const {
    return session_items_[session];
  }

  /// Sessions containing an item, most recent first.
  std::span<const std::uint32_t> sessions_with(ItemId item) const {
    if (item < 0 || static_cast<std::size_t>(item) >= item_sessions_.size()) {
      return {};
    }
    return item_sessions_[item];
  }

  /// Lower rank = more recent (ties broken toward later insertion).
  std::uint32_t recency_rank(std::uint32_t session) const {
    return recency_rank_[session];
  }

  /// Whether item b directly followed item a anywhere in training.
  bool has_pair(ItemId a, ItemId b) const {
    return pairs_.contains((static_cast<std::uint64_t>(a) << 32) |
                           static_cast<std::uint32_t>(b));
  }

  std::span<const std::int64_t> popularity() const { return popularity_; }
  std::size_t memory_bytes() const;

 private:
  std::vector<std::vector<std::uint32_t>> item_sessions_;
  std::vector<std::vector<ItemId>> session_items_;
  std::vector<std::uint32_t> recency_rank_;
  std::unordered_set<std::uint64_t> pairs_;
  std::vector<std::int64_t> popularity_;
};

enum class KnnVariant { sknn, v_sknn, s_sknn, sf_sknn };

struct KnnConfig {
  std::size_t k = 500;          // neighbors scored
  std::size_t m = 1000;         // recency sample size (kAllNeighbors = off)
  KnnVariant variant = KnnVariant::sknn;
  bool exclude_prefix_items = true;
};

SessionIndex fit_index(const std::vector<Session>& train);

/// Training sessions sharing at least one item with the prefix, restricted
/// to the m most recent such sessions (most recent first).
std::vector<std::uint32_t> sample_neighbors(const SessionIndex& index,
                                            std::span<const ItemId> prefix,
                                            std::size_t m);

/// |a ∩ b| / sqrt(|a| * |b|) over binary item sets.
double cosine_binary(std::span<const ItemId> items1,
                     std::span<const ItemId> items2);

Ranking rank_sknn(const SessionIndex& index, const KnnConfig& cfg,
                  std::span<const ItemId> prefix, std::size_t k_items);
Ranking rank_vsknn(const SessionIndex& index, const KnnConfig& cfg,
                   std::span<const ItemId> prefix, std::size_t k_items);
Ranking rank_ssknn(const SessionIndex& index, const KnnConfig& cfg,
                   std::span<const ItemId> prefix, std::size_t k_items);
Ranking rank_sfsknn(const SessionIndex& index, const KnnConfig& cfg,
                    std::span<const ItemId> prefix, std::size_t k_items);

/// Item-to-item cosine over binary session-occurrence vectors of the last
/// prefix item. The query item itself is never returned.
Ranking rank_iknn(const SessionIndex& index, std::span<const ItemId> prefix,
                  std::size_t k_items);

class KnnRecommender final : public Recommender {
 public:
  explicit KnnRecommender(KnnConfig cfg) : cfg_(cfg) {}

  void fit(const std::vector<Session>& train) override {
    index_.emplace(train);
  }
  Ranking rank(std::span<const ItemId> prefix, std::size_t k) const override;
  std::size_t memory_bytes() const override {
    return index_ ? index_->memory_bytes() : 0;
  }
  std::string name() const override;

 private:
  KnnConfig cfg_;
  std::optional<SessionIndex> index_;
};

class ItemKnnRecommender final : public Recommender {
 public:
  void fit(const std::vector<Session>& train) override {
    index_.emplace(train);
  }
  Ranking rank(std::span<const ItemId> prefix, std::size_t k) const override {
    return rank_iknn(*index_, prefix, k);
  }
  std::size_t memory_bytes() const override {
    return index_ ? index_->memory_bytes() : 0;
  }
  std::string name() const override { return "iknn"; }

 private:
  std::optional<SessionIndex> index_;
};

}  // namespace sessrec
