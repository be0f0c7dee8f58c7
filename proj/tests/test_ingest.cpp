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

#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "oracles.hpp"
#include "sessrec/ingest.hpp"

using namespace sessrec;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& content) {
    static int counter = 0;
    path = "/tmp/sessrec_test_" + std::to_string(counter++) + ".csv";
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

EventLog log_from(
    std::initializer_list<std::tuple<const char*, const char*, std::int64_t>>
        rows) {
  std::vector<RawEvent> raw;
  std::size_t line = 2;
  for (const auto& [key, item, time] : rows) {
    raw.push_back(RawEvent{key, item, time, true, line++});
  }
  return intern_items(raw);
}

}  // namespace

TEST_CASE("load_events parses rows in order") {
  TempFile f("s,i,t\nu1,a,100\nu1,b,200\n");
  ColumnSpec spec;
  spec.session_col = "s";
  spec.item_col = "i";
  spec.time_col = "t";
  const auto recs = load_events(f.path, spec);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].item == "a");
  CHECK(recs[0].time == 100);
  CHECK(recs[1].line_no == 3);
}

TEST_CASE("load_events understands the e-commerce export layout") {
  TempFile f(
      "SessionId,Timestamp,ItemId\n"
      "1,1396867869,214536502\n"
      "1,1396868100.994,214536500\n");
  ColumnSpec spec;
  spec.session_col = "SessionId";
  spec.item_col = "ItemId";
  spec.time_col = "Timestamp";
  const auto recs = load_events(f.path, spec);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].time == 1396867869);
  CHECK(recs[1].time == 1396868100);  // fraction truncated
  CHECK(recs[0].item == "214536502");
}

TEST_CASE("load_events parses calendar dates as UTC") {
  TempFile f("s,i,t\nu,a,2014-04-07 10:51:09\nu,b,2014-04-07\n");
  ColumnSpec spec;
  spec.session_col = "s";
  spec.item_col = "i";
  spec.time_col = "t";
  spec.time_format = TimeFormat::date;
  const auto recs = load_events(f.path, spec);
  CHECK(recs[0].time == 1396867869);  // 2014-04-07T10:51:09Z
  CHECK(recs[1].time == 1396828800);  // midnight
}

TEST_CASE("load_events reports malformed rows with line numbers") {
  ColumnSpec spec;
  spec.session_col = "s";
  spec.item_col = "i";
  spec.time_col = "t";
  {
    TempFile f("s,i,t\nu1,,100\n");
    CHECK_THROWS_WITH_AS(load_events(f.path, spec),
                         "empty item field at line 2", std::runtime_error);
  }
  {
    TempFile f("s,i,t\nu1,a,notatime\n");
    CHECK_THROWS_AS(load_events(f.path, spec), std::runtime_error);
  }
  {
    TempFile f("s,i\nu1,a\n");
    CHECK_THROWS_AS(load_events(f.path, spec), std::runtime_error);
  }
  CHECK_THROWS_AS(load_events("/nonexistent/file.csv", spec),
                  std::runtime_error);
}

TEST_CASE("intern_items assigns ids in first-appearance order") {
  std::vector<RawEvent> raw = {{"u", "X", 1, true, 2},
                               {"u", "Y", 2, true, 3},
                               {"u", "X", 3, true, 4}};
  const auto log = intern_items(raw);
  CHECK(log.items.size() == 2);
  CHECK(log.events[0].item == 0);
  CHECK(log.events[1].item == 1);
  CHECK(log.events[2].item == 0);
  CHECK(log.items.externalize(0) == "X");

  const auto empty = intern_items({});
  CHECK(empty.items.size() == 0);
  CHECK(empty.events.empty());
}

TEST_CASE("idle sessionization splits on gaps strictly above the threshold") {
  const auto log = log_from({{"u", "a", 0},
                             {"u", "b", 10},
                             {"u", "c", 7210},
                             {"u", "d", 7215}});
  const auto sessions = sessionize_idle(log, 1800);
  REQUIRE(sessions.size() == 2);
  CHECK(sessions[0].size() == 2);
  CHECK(sessions[1].size() == 2);
  CHECK(sessions[1].start_time == 7210);

  // boundary: a gap of exactly the threshold stays in one session
  const auto log2 = log_from({{"u", "a", 0}, {"u", "b", 1800}});
  CHECK(sessionize_idle(log2, 1800).size() == 1);

  const auto log3 = log_from({{"u", "a", 5}});
  const auto single = sessionize_idle(log3, 1800);
  REQUIRE(single.size() == 1);
  CHECK(single[0].size() == 1);
}

TEST_CASE("idle sessionization preserves each user's event multiset") {
  SeededRng rng(21);
  std::vector<RawEvent> raw;
  for (int i = 0; i < 400; ++i) {
    raw.push_back(RawEvent{"u" + std::to_string(rng.next_below(5)),
                           "i" + std::to_string(rng.next_below(20)),
                           static_cast<std::int64_t>(rng.next_below(100000)),
                           true, static_cast<std::size_t>(i + 2)});
  }
  const auto log = intern_items(raw);
  const auto sessions = sessionize_idle(log, 600);

  std::map<std::int32_t, std::multiset<ItemId>> expected;
  for (const auto& e : log.events) expected[e.key].insert(e.item);
  // sessions do not retain the key, so compare the global multiset plus
  // per-session time ordering
  std::multiset<ItemId> got;
  for (const auto& s : sessions) {
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      got.insert(s.events[i].item);
      if (i > 0) CHECK(s.events[i].time >= s.events[i - 1].time);
    }
  }
  std::multiset<ItemId> want;
  for (const auto& [key, items] : expected) {
    want.insert(items.begin(), items.end());
  }
  CHECK(got == want);
}

TEST_CASE("day sessionization groups by UTC calendar day") {
  const auto log = log_from({{"u", "a", 100},
                             {"u", "b", 50'000},
                             {"u", "c", 80'000},
                             {"u", "d", 90'000}});
  // 100, 50000, 80000 are day 0; 90000 is day 1
  const auto sessions = sessionize_by_day(log);
  REQUIRE(sessions.size() == 2);
  CHECK(sessions[0].size() == 3);
  CHECK(sessions[1].size() == 1);
}

TEST_CASE("keyed sessionization without timestamps uses ordinals") {
  std::vector<RawEvent> raw = {{"p1", "a", 0, false, 2},
                               {"p2", "x", 0, false, 3},
                               {"p1", "b", 0, false, 4}};
  const auto log = intern_items(raw);
  const auto sessions = sessionize_keyed(log);
  REQUIRE(sessions.size() == 2);
  CHECK(sessions[0].events[0].time == 1);
  CHECK(sessions[0].events[1].time == 2);
  CHECK(sessions[0].start_time == 0);  // insertion index of key p1
  CHECK(sessions[1].start_time == 1);
}

TEST_CASE("filter_sessions drops short sessions") {
  auto sessions = oracle::corpus({{0, 1}, {2}, {3, 4, 5}});
  const auto kept = filter_sessions(std::move(sessions), 2);
  REQUIRE(kept.size() == 2);
  CHECK(filter_sessions({}, 2).empty());
}

TEST_CASE("min item support knob") {
  auto sessions = oracle::corpus({{0, 1, 2}, {0, 1}, {0, 3}});
  // item 0 occurs 3x, 1 occurs 2x, 2 and 3 once
  const auto kept = filter_min_item_support(std::move(sessions), 2, 2);
  REQUIRE(kept.size() == 2);
  for (const auto& s : kept) {
    for (const auto& e : s.events) CHECK(e.item <= 1);
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      CHECK(s.events[i].ordinal == static_cast<std::int32_t>(i + 1));
    }
  }
}

namespace {

// one two-event session per day, day d at [d*86400 + 10, d*86400 + 20]
std::vector<Session> daily_sessions(int days) {
  std::vector<Session> out;
  for (int d = 0; d < days; ++d) {
    Session s;
    s.id = d;
    s.start_time = d * kSecondsPerDay + 10;
    s.events = {Event{0, s.start_time, 1},
                Event{1, s.start_time + 10, 2}};
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("sliding window split tiles from the dataset start") {
  const auto sessions = daily_sessions(10);
  SplitSpec spec;
  spec.mode = SplitMode::sliding_window;
  spec.n_slices = 2;
  spec.train_days = 4;
  spec.test_days = 1;
  const auto slices = sliding_window_split(sessions, spec);
  REQUIRE(slices.size() == 2);

  auto ids = [](const std::vector<Session>& v) {
    std::set<SessionId> out;
    for (const auto& s : v) out.insert(s.id);
    return out;
  };
  CHECK(ids(slices[0].train) == std::set<SessionId>{0, 1, 2, 3});
  CHECK(ids(slices[0].test) == std::set<SessionId>{4});
  CHECK(ids(slices[1].train) == std::set<SessionId>{5, 6, 7, 8});
  CHECK(ids(slices[1].test) == std::set<SessionId>{9});

  SplitSpec too_many = spec;
  too_many.n_slices = 3;
  CHECK_THROWS_AS(sliding_window_split(sessions, too_many),
                  std::runtime_error);
}

TEST_CASE("sliding window slices are disjoint and train precedes test") {
  SeededRng rng(5);
  auto sessions = oracle::random_corpus(rng, 60, 10);
  // spread the starts over 12 days
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const std::int64_t start =
        static_cast<std::int64_t>(i) * 12 * kSecondsPerDay /
        static_cast<std::int64_t>(sessions.size());
    const std::int64_t shift = start - sessions[i].start_time;
    sessions[i].start_time += shift;
    for (auto& e : sessions[i].events) e.time += shift;
  }
  SplitSpec spec;
  spec.n_slices = 3;
  spec.train_days = 3;
  spec.test_days = 1;
  const auto slices = sliding_window_split(sessions, spec);
  std::set<SessionId> seen;
  for (const auto& slice : slices) {
    Slice pruned = prune_test(slice);
    validate_slice(pruned, true);
    for (const auto& s : slice.train) CHECK(seen.insert(s.id).second);
    for (const auto& s : slice.test) CHECK(seen.insert(s.id).second);
  }
}

TEST_CASE("single split keeps the last test_days for testing") {
  const auto sessions = daily_sessions(7);
  const Slice slice = single_split(sessions, 1.0);
  CHECK(slice.train.size() == 6);
  CHECK(slice.test.size() == 1);
  CHECK(slice.test[0].id == 6);
  CHECK_THROWS_AS(single_split(sessions, 7.0), std::runtime_error);
  CHECK_THROWS_AS(single_split(sessions, 10.0), std::runtime_error);
}

TEST_CASE("random split is seeded and partitions the sessions") {
  const auto sessions = daily_sessions(10);
  const Slice a = random_split(sessions, 0.2, 99);
  const Slice b = random_split(sessions, 0.2, 99);
  CHECK(a.test.size() == 2);
  CHECK(a.train.size() == 8);
  REQUIRE(a.test.size() == b.test.size());
  for (std::size_t i = 0; i < a.test.size(); ++i) {
    CHECK(a.test[i].id == b.test[i].id);
  }
  std::set<SessionId> all;
  for (const auto& s : a.train) all.insert(s.id);
  for (const auto& s : a.test) all.insert(s.id);
  CHECK(all.size() == sessions.size());
  CHECK_THROWS_AS(random_split(sessions, 0.0, 1), std::invalid_argument);
}

TEST_CASE("prune_test removes unseen items and short leftovers") {
  Slice slice;
  slice.train = oracle::corpus({{0, 1}, {1, 2}});
  slice.test.push_back(oracle::make_session(10, {0, 7}));         // drops
  slice.test.push_back(oracle::make_session(11, {0, 7, 2}));      // keeps 0,2
  slice.test.push_back(oracle::make_session(12, {1, 2}));         // unchanged
  const Slice pruned = prune_test(std::move(slice));
  REQUIRE(pruned.test.size() == 2);
  CHECK(pruned.test[0].id == 11);
  REQUIRE(pruned.test[0].size() == 2);
  CHECK(pruned.test[0].events[0].item == 0);
  CHECK(pruned.test[0].events[1].item == 2);
  CHECK(pruned.test[0].events[1].ordinal == 2);
}

TEST_CASE("validation split nests inside the training window") {
  const auto sessions = daily_sessions(31);
  SplitSpec spec;
  spec.mode = SplitMode::single;
  spec.test_days = 1;
  const Slice outer = single_split(sessions, spec.test_days);
  CHECK(outer.train.size() == 30);
  const Slice val = make_validation_split(outer.train, spec);
  CHECK(val.train.size() == 29);
  CHECK(val.test.size() == 1);
  // validation test day is the last training day, never the outer test day
  std::set<SessionId> outer_test_ids;
  for (const auto& s : outer.test) outer_test_ids.insert(s.id);
  for (const auto& s : val.test) CHECK(outer_test_ids.count(s.id) == 0);

  // determinism
  const Slice val2 = make_validation_split(outer.train, spec);
  REQUIRE(val.test.size() == val2.test.size());
  CHECK(val.test[0].id == val2.test[0].id);
}

TEST_CASE("validation split for random mode uses the configured fraction") {
  const auto sessions = daily_sessions(20);
  SplitSpec spec;
  spec.mode = SplitMode::random;
  spec.test_fraction = 0.25;
  const Slice val = make_validation_split(sessions, spec);
  CHECK(val.test.size() == 5);
}

TEST_CASE("truncate_train keeps the trailing window") {
  const auto sessions = daily_sessions(10);
  CHECK(truncate_train(sessions, 100.0).size() == 10);
  const auto last3 = truncate_train(sessions, 3.0);
  REQUIRE(last3.size() == 3);
  CHECK(last3[0].id == 7);
  CHECK(last3[2].id == 9);
  const auto last1 = truncate_train(sessions, 1.0);
  REQUIRE(last1.size() == 1);
  CHECK(last1[0].id == 9);
  CHECK_THROWS_AS(truncate_train(sessions, 0.0), std::invalid_argument);
}
