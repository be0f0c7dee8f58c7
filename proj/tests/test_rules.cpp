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
#include <doctest.h>

#include <algorithm>
#include <chrono>

#include "oracles.hpp"
#include "sessrec/rules.hpp"

using namespace sessrec;

namespace {

double score_of(const RuleTable& table, ItemId antecedent, ItemId item) {
  for (const auto& rule : table.consequents(antecedent)) {
    if (rule.consequent == item) return rule.weight;
  }
  return 0.0;
}

void check_against_oracle(const RuleTable& table, const oracle::ScoreMap& want,
                          ItemId antecedent) {
  const auto rules = table.consequents(antecedent);
  CHECK(rules.size() == want.size());
  for (const auto& [item, score] : want) {
    CHECK(std::abs(score_of(table, antecedent, item) - score) <= 1e-12);
  }
}

}  // namespace

TEST_CASE("ar matches the worked co-occurrence example") {
  // items: A=0 B=1 C=2
  const auto train = oracle::corpus({{0, 1, 2}, {0, 1}});
  const auto table = fit_ar(train);
  CHECK(score_of(table, 1, 0) == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(score_of(table, 1, 2) == doctest::Approx(1.0 / 3).epsilon(1e-12));

  const std::vector<ItemId> unseen = {9};
  CHECK(rank_rules(table, unseen, 10).empty());

  const auto tiny = fit_ar(oracle::corpus({{0, 1}}));
  CHECK(score_of(tiny, 1, 0) == 1.0);
}

TEST_CASE("mc matches the worked transition examples") {
  const auto t1 = fit_mc(oracle::corpus({{0, 1, 2}, {0, 1}}));
  CHECK(score_of(t1, 0, 1) == 1.0);

  const auto t2 = fit_mc(oracle::corpus({{0, 1}, {0, 2}}));
  CHECK(score_of(t2, 0, 1) == 0.5);
  CHECK(score_of(t2, 0, 2) == 0.5);
}

TEST_CASE("mc weights per antecedent form a probability distribution") {
  SeededRng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto corpus = oracle::random_corpus(rng, 8, 6);
    const auto table = fit_mc(corpus);
    for (ItemId a = 0; a < static_cast<ItemId>(table.catalog_size()); ++a) {
      const auto rules = table.consequents(a);
      if (rules.empty()) continue;
      double sum = 0.0;
      for (const auto& r : rules) sum += r.weight;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("sr accumulates distance-decayed weights") {
  // [[A,B,C]] query A: raw B=1, C=1/2; A never at position >= 2 so the
  // normalizer is zero and raw weights stand
  const auto t1 = fit_sr(oracle::corpus({{0, 1, 2}}));
  CHECK(score_of(t1, 0, 1) == 1.0);
  CHECK(score_of(t1, 0, 2) == 0.5);
  const std::vector<ItemId> prefix = {0};
  const auto ranked = rank_rules(t1, prefix, 2);
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].item == 1);
  CHECK(ranked[1].item == 2);

  // [[A,A,B]] query A: B accumulates 1/1 + 1/2 = 1.5 before the
  // per-antecedent normalizer (A at position 2 -> normalizer 2)
  const auto t2 = fit_sr(oracle::corpus({{0, 0, 1}}));
  CHECK(score_of(t2, 0, 1) == doctest::Approx(1.5 / 2.0).epsilon(1e-12));
}

TEST_CASE("rank_rules edge cases") {
  const auto table = fit_sr(oracle::corpus({{0, 1, 2}}));
  const std::vector<ItemId> prefix = {0};
  CHECK(rank_rules(table, prefix, 0).empty());
  CHECK(rank_rules(table, {}, 5).empty());
  CHECK(rank_rules(table, prefix, 100).size() == 2);
}

TEST_CASE("empty training set is rejected") {
  CHECK_THROWS_AS(fit_ar({}), std::invalid_argument);
  CHECK_THROWS_AS(fit_mc({}), std::invalid_argument);
  CHECK_THROWS_AS(fit_sr({}), std::invalid_argument);
}

TEST_CASE("rule builders match the brute-force formulas") {
  SeededRng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const auto corpus = oracle::random_corpus(rng, 8, 6);
    const auto ar = fit_ar(corpus);
    const auto mc = fit_mc(corpus);
    const auto sr = fit_sr(corpus);
    for (ItemId a = 0; a < static_cast<ItemId>(ar.catalog_size()); ++a) {
      check_against_oracle(ar, oracle::ar_scores(corpus, a), a);
      check_against_oracle(mc, oracle::mc_scores(corpus, a), a);
      check_against_oracle(sr, oracle::sr_scores(corpus, a), a);
    }
  }
}

TEST_CASE("normalization never changes the ranking") {
  SeededRng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto corpus = oracle::random_corpus(rng, 8, 6);
    const auto table = fit_sr(corpus);
    const auto pop = table.popularity();
    for (ItemId a = 0; a < static_cast<ItemId>(table.catalog_size()); ++a) {
      const auto want = oracle::sr_scores(corpus, a);
      // rank raw (unnormalized) counts under the same tie-breaking
      oracle::ScoreMap raw;
      for (const auto& p : corpus) {
        for (std::size_t x = 1; x < p.events.size(); ++x) {
          for (std::size_t y = 0; y < x; ++y) {
            if (p.events[y].item != a) continue;
            raw[p.events[x].item] += 1.0 / static_cast<double>(x - y);
          }
        }
      }
      std::vector<Scored> raw_flat;
      for (const auto& [item, score] : raw) raw_flat.push_back({item, score});
      const auto raw_ranked =
          top_k_ranking(std::move(raw_flat), raw.size(), pop);
      const std::vector<ItemId> prefix = {a};
      const auto ranked = rank_rules(table, prefix, raw.size());
      REQUIRE(ranked.size() == raw_ranked.size());
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        CHECK(ranked[i].item == raw_ranked[i].item);
      }
    }
  }
}

TEST_CASE("fit is invariant to the order of training sessions") {
  SeededRng rng(55);
  auto corpus = oracle::random_corpus(rng, 8, 6);
  const auto before = fit_sr(corpus);
  std::reverse(corpus.begin(), corpus.end());
  const auto after = fit_sr(corpus);
  for (ItemId a = 0; a < static_cast<ItemId>(before.catalog_size()); ++a) {
    const auto lhs = before.consequents(a);
    const auto rhs = after.consequents(a);
    REQUIRE(lhs.size() == rhs.size());
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      CHECK(lhs[i].consequent == rhs[i].consequent);
      CHECK(lhs[i].weight == rhs[i].weight);
    }
  }
}

TEST_CASE("single-pass builders stay fast at a million events") {
  // ~250k sessions of 4 events each
  std::vector<Session> big;
  SeededRng rng(1);
  big.reserve(250'000);
  for (int i = 0; i < 250'000; ++i) {
    Session s;
    s.id = i;
    s.start_time = i;
    for (int j = 0; j < 4; ++j) {
      s.events.push_back(Event{static_cast<ItemId>(rng.next_below(5000)),
                               s.start_time + j,
                               static_cast<std::int32_t>(j + 1)});
    }
    big.push_back(std::move(s));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto mc = fit_mc(big);
  const auto sr = fit_sr(big);
  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
  CHECK(mc.catalog_size() == 5000);
  CHECK(sr.catalog_size() == 5000);
  CHECK(elapsed < 10.0);
}
