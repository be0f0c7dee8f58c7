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
#include "sessrec/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "sessrec/math.hpp"

namespace sessrec {

namespace {

std::vector<ItemId> distinct_sorted(std::span<const ItemId> items) {
  std::vector<ItemId> out(items.begin(), items.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool contains_sorted(std::span<const ItemId> sorted, ItemId item) {
  return std::binary_search(sorted.begin(), sorted.end(), item);
}

struct Neighbor {
  std::uint32_t session;
  double sim;
};

// Keeps the cfg.k most similar candidates; ties broken toward the more
// recent session so results are reproducible.
std::vector<Neighbor> select_neighbors(const SessionIndex& index,
                                       std::vector<Neighbor>&& candidates,
                                       std::size_t k) {
  auto order = [&index](const Neighbor& a, const Neighbor& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return index.recency_rank(a.session) < index.recency_rank(b.session);
  };
  const std::size_t n = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + n,
                    candidates.end(), order);
  candidates.resize(n);
  return std::move(candidates);
}

}  // namespace

SessionIndex::SessionIndex(const std::vector<Session>& train) {
  if (train.empty()) {
    throw std::invalid_argument("fit_index: empty training set");
  }
  const std::size_t n = train.size();
  session_items_.resize(n);
  ItemId max_item = -1;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ItemId> items;
    items.reserve(train[i].events.size());
    for (const auto& e : train[i].events) {
      items.push_back(e.item);
      max_item = std::max(max_item, e.item);
    }
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    session_items_[i] = std::move(items);
  }

  popularity_.assign(static_cast<std::size_t>(max_item + 1), 0);
  for (const auto& s : train) {
    for (const auto& e : s.events) ++popularity_[e.item];
    for (std::size_t j = 0; j + 1 < s.events.size(); ++j) {
      pairs_.insert(
          (static_cast<std::uint64_t>(s.events[j].item) << 32) |
          static_cast<std::uint32_t>(s.events[j + 1].item));
    }
  }

  // recency: later start_time first, later insertion breaking ties
  std::vector<std::uint32_t> by_recency(n);
  std::iota(by_recency.begin(), by_recency.end(), 0u);
  std::sort(by_recency.begin(), by_recency.end(),
            [&train](std::uint32_t a, std::uint32_t b) {
              if (train[a].start_time != train[b].start_time) {
                return train[a].start_time > train[b].start_time;
              }
              return a > b;
            });
  recency_rank_.resize(n);
  for (std::uint32_t rank = 0; rank < n; ++rank) {
    recency_rank_[by_recency[rank]] = rank;
  }

  item_sessions_.resize(static_cast<std::size_t>(max_item + 1));
  for (std::uint32_t rank = 0; rank < n; ++rank) {
    const std::uint32_t sess = by_recency[rank];
    for (const ItemId item : session_items_[sess]) {
      item_sessions_[item].push_back(sess);
    }
  }
}

std::size_t SessionIndex::memory_bytes() const {
  std::size_t bytes = recency_rank_.capacity() * sizeof(std::uint32_t) +
                      popularity_.capacity() * sizeof(std::int64_t) +
                      pairs_.size() * sizeof(std::uint64_t) * 2;
  for (const auto& v : item_sessions_) {
    bytes += v.capacity() * sizeof(std::uint32_t);
  }
  for (const auto& v : session_items_) bytes += v.capacity() * sizeof(ItemId);
  return bytes;
}

SessionIndex fit_index(const std::vector<Session>& train) {
  return SessionIndex(train);
}

std::vector<std::uint32_t> sample_neighbors(const SessionIndex& index,
                                            std::span<const ItemId> prefix,
                                            std::size_t m) {
  const auto items = distinct_sorted(prefix);
  // Merge the per-item recency-ordered lists until m distinct sessions are
  // collected; identical heads across lists are advanced together.
  struct Cursor {
    std::span<const std::uint32_t> list;
    std::size_t pos = 0;
  };
  std::vector<Cursor> cursors;
  cursors.reserve(items.size());
  for (const ItemId item : items) {
    auto list = index.sessions_with(item);
    if (!list.empty()) cursors.push_back({list, 0});
  }
  std::vector<std::uint32_t> out;
  while (out.size() < m && !cursors.empty()) {
    std::uint32_t best = 0;
    std::uint32_t best_rank = std::numeric_limits<std::uint32_t>::max();
    for (const auto& c : cursors) {
      const std::uint32_t sess = c.list[c.pos];
      const std::uint32_t rank = index.recency_rank(sess);
      if (rank < best_rank) {
        best_rank = rank;
        best = sess;
      }
    }
    out.push_back(best);
    for (auto& c : cursors) {
      if (c.pos < c.list.size() && c.list[c.pos] == best) ++c.pos;
    }
    std::erase_if(cursors,
                  [](const Cursor& c) { return c.pos >= c.list.size(); });
  }
  return out;
}

double cosine_binary(std::span<const ItemId> items1,
                     std::span<const ItemId> items2) {
  if (items1.empty() || items2.empty()) return 0.0;
  std::size_t i = 0, j = 0, both = 0;
  while (i < items1.size() && j < items2.size()) {
    if (items1[i] == items2[j]) {
      ++both;
      ++i;
      ++j;
    } else if (items1[i] < items2[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(both) /
         std::sqrt(static_cast<double>(items1.size()) *
                   static_cast<double>(items2.size()));
}

namespace {

// Shared scoring skeleton: sample, compute similarities, keep cfg.k
// neighbors, accumulate per-item scores.
template <typename SimFn, typename NeighborWeightFn, typename ItemFilterFn>
Ranking rank_neighbors(const SessionIndex& index, const KnnConfig& cfg,
                       std::span<const ItemId> prefix, std::size_t k_items,
                       SimFn&& sim_of, NeighborWeightFn&& weight_of,
                       ItemFilterFn&& admits) {
  if (prefix.empty() || k_items == 0) return {};
  const auto prefix_items = distinct_sorted(prefix);
  std::vector<Neighbor> candidates;
  for (const std::uint32_t sess : sample_neighbors(index, prefix, cfg.m)) {
    candidates.push_back({sess, sim_of(index.items_of(sess))});
  }
  const auto neighbors =
      select_neighbors(index, std::move(candidates), cfg.k);

  std::unordered_map<ItemId, double> scores;
  for (const auto& nb : neighbors) {
    const double w = nb.sim * weight_of(nb);
    if (w == 0.0) continue;
    for (const ItemId item : index.items_of(nb.session)) {
      if (cfg.exclude_prefix_items && contains_sorted(prefix_items, item)) {
        continue;
      }
      if (!admits(item)) continue;
      scores[item] += w;
    }
  }
  std::vector<Scored> flat;
  flat.reserve(scores.size());
  for (const auto& [item, score] : scores) flat.push_back({item, score});
  return top_k_ranking(std::move(flat), k_items, index.popularity());
}

double ssknn_position_weight(const SessionIndex& index,
                             std::span<const ItemId> prefix,
                             std::uint32_t session) {
  const auto items = index.items_of(session);
  for (std::size_t pos = prefix.size(); pos > 0; --pos) {
    if (contains_sorted(items, prefix[pos - 1])) {
      return static_cast<double>(pos) / static_cast<double>(prefix.size());
    }
  }
  return 0.0;
}

}  // namespace

Ranking rank_sknn(const SessionIndex& index, const KnnConfig& cfg,
                  std::span<const ItemId> prefix, std::size_t k_items) {
  const auto prefix_items = distinct_sorted(prefix);
  return rank_neighbors(
      index, cfg, prefix, k_items,
      [&](std::span<const ItemId> items) {
        return cosine_binary(prefix_items, items);
      },
      [](const Neighbor&) { return 1.0; }, [](ItemId) { return true; });
}

Ranking rank_vsknn(const SessionIndex& index, const KnnConfig& cfg,
                   std::span<const ItemId> prefix, std::size_t k_items) {
  // Linear position decay pos/len; the last element weighs 1. A repeated
  // item keeps the weight of its most recent occurrence.
  std::unordered_map<ItemId, double> weights;
  for (std::size_t pos = 0; pos < prefix.size(); ++pos) {
    const double w =
        static_cast<double>(pos + 1) / static_cast<double>(prefix.size());
    auto [it, inserted] = weights.try_emplace(prefix[pos], w);
    if (!inserted) it->second = std::max(it->second, w);
  }
  return rank_neighbors(
      index, cfg, prefix, k_items,
      [&](std::span<const ItemId> items) {
        double dot = 0.0;
        for (const ItemId item : items) {
          auto it = weights.find(item);
          if (it != weights.end()) dot += it->second;
        }
        return dot;
      },
      [](const Neighbor&) { return 1.0; }, [](ItemId) { return true; });
}

Ranking rank_ssknn(const SessionIndex& index, const KnnConfig& cfg,
                   std::span<const ItemId> prefix, std::size_t k_items) {
  const auto prefix_items = distinct_sorted(prefix);
  return rank_neighbors(
      index, cfg, prefix, k_items,
      [&](std::span<const ItemId> items) {
        return cosine_binary(prefix_items, items);
      },
      [&](const Neighbor& nb) {
        return ssknn_position_weight(index, prefix, nb.session);
      },
      [](ItemId) { return true; });
}

Ranking rank_sfsknn(const SessionIndex& index, const KnnConfig& cfg,
                    std::span<const ItemId> prefix, std::size_t k_items) {
  if (prefix.empty()) return {};
  const auto prefix_items = distinct_sorted(prefix);
  const ItemId last = prefix.back();
  return rank_neighbors(
      index, cfg, prefix, k_items,
      [&](std::span<const ItemId> items) {
        return cosine_binary(prefix_items, items);
      },
      [](const Neighbor&) { return 1.0; },
      [&](ItemId item) { return index.has_pair(last, item); });
}

Ranking rank_iknn(const SessionIndex& index, std::span<const ItemId> prefix,
                  std::size_t k_items) {
  if (prefix.empty() || k_items == 0) return {};
  const ItemId last = prefix.back();
  const auto with_last = index.sessions_with(last);
  if (with_last.empty()) return {};
  std::unordered_map<ItemId, std::int64_t> shared;
  for (const std::uint32_t sess : with_last) {
    for (const ItemId item : index.items_of(sess)) {
      if (item != last) ++shared[item];
    }
  }
  const auto n_last = static_cast<double>(with_last.size());
  std::vector<Scored> flat;
  flat.reserve(shared.size());
  for (const auto& [item, both] : shared) {
    const auto n_item = static_cast<double>(index.sessions_with(item).size());
    flat.push_back(
        {item, static_cast<double>(both) / std::sqrt(n_last * n_item)});
  }
  return top_k_ranking(std::move(flat), k_items, index.popularity());
}

Ranking KnnRecommender::rank(std::span<const ItemId> prefix,
                             std::size_t k) const {
  switch (cfg_.variant) {
    case KnnVariant::sknn: return rank_sknn(*index_, cfg_, prefix, k);
    case KnnVariant::v_sknn: return rank_vsknn(*index_, cfg_, prefix, k);
    case KnnVariant::s_sknn: return rank_ssknn(*index_, cfg_, prefix, k);
    case KnnVariant::sf_sknn: return rank_sfsknn(*index_, cfg_, prefix, k);
  }
  return {};
}

std::string KnnRecommender::name() const {
  switch (cfg_.variant) {
    case KnnVariant::sknn: return "sknn";
    case KnnVariant::v_sknn: return "v-sknn";
    case KnnVariant::s_sknn: return "s-sknn";
    case KnnVariant::sf_sknn: return "sf-sknn";
  }
  return "knn";
}

}  // namespace sessrec
