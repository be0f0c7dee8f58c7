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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sessrec {

/// Dense item index. Ids form a contiguous range [0, catalog size).
using ItemId = std::int32_t;
using SessionId = std::int64_t;

/// One interaction. `time` is epoch seconds; datasets without timestamps
/// carry the ordinal as a time surrogate. Ordinals are 1-based and
/// consecutive within a session.
struct Event {
  ItemId item = 0;
  std::int64_t time = 0;
  std::int32_t ordinal = 1;
};

/// A chronologically ordered run of events of one user. Events are sorted
/// by (time, original record order); start_time is the first event's time
/// (insertion index for timestamp-free data).
struct Session {
  SessionId id = 0;
  std::int64_t start_time = 0;
  std::vector<Event> events;

  std::size_t size() const { return events.size(); }
  std::int64_t end_time() const {
    return events.empty() ? start_time : events.back().time;
  }
};

struct Scored {
  ItemId item = 0;
  double score = 0.0;
};

/// Top-k recommendation list, scores non-increasing, items distinct.
using Ranking = std::vector<Scored>;

/// Bijection between external string identifiers and dense indices.
/// Assignment order is order of first appearance.
class StringInterner {
 public:
  std::int32_t intern(std::string_view raw) {
    auto it = to_id_.find(raw);
    if (it != to_id_.end()) return it->second;
    const auto id = static_cast<std::int32_t>(to_raw_.size());
    to_raw_.emplace_back(raw);
    to_id_.emplace(to_raw_.back(), id);
    return id;
  }

  std::optional<std::int32_t> lookup(std::string_view raw) const {
    auto it = to_id_.find(raw);
    if (it == to_id_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& externalize(std::int32_t id) const { return to_raw_[id]; }
  std::size_t size() const { return to_raw_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  struct Eq {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const {
      return a == b;
    }
  };
  std::unordered_map<std::string, std::int32_t, Hash, Eq> to_id_;
  std::vector<std::string> to_raw_;
};

/// Uniform surface over all algorithms: fit on training sessions, then
/// rank candidate next items for a session prefix. rank() is a pure
/// function of (fitted state, prefix, k), never returns items outside the
/// training catalog, and is safe to call concurrently after fit().
class Recommender {
 public:
  virtual ~Recommender() = default;

  virtual void fit(const std::vector<Session>& train) = 0;
  virtual Ranking rank(std::span<const ItemId> prefix, std::size_t k) const = 0;

  /// Bytes held by the principal fitted data structures.
  virtual std::size_t memory_bytes() const = 0;
  virtual std::string name() const = 0;
};

}  // namespace sessrec
