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
#include "sessrec/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "sessrec/rng.hpp"

namespace sessrec {

namespace {

std::string line_msg(const std::string& what, std::size_t line_no) {
  return what + " at line " + std::to_string(line_no);
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(delim, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// civil-days algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  std::int64_t v = 0;
  bool neg = false;
  std::size_t i = 0;
  if (s[0] == '-') {
    neg = true;
    i = 1;
    if (s.size() == 1) return false;
  }
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = neg ? -v : v;
  return true;
}

// Accepts integral or fractional epoch values; fractions are truncated.
bool parse_epoch(std::string_view s, std::int64_t& out) {
  const std::size_t dot = s.find('.');
  if (dot == std::string_view::npos) return parse_int(s, out);
  return parse_int(s.substr(0, dot), out);
}

// "YYYY-MM-DD[ hh:mm:ss]"; a 'T' separator and trailing fraction/zone
// markers are tolerated so raw e-commerce exports load unchanged.
bool parse_date_time(std::string_view s, std::int64_t& out) {
  auto num = [&](std::size_t pos, std::size_t len, std::int64_t& v) {
    if (pos + len > s.size()) return false;
    return parse_int(s.substr(pos, len), v);
  };
  std::int64_t y, mo, d;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return false;
  if (!num(0, 4, y) || !num(5, 2, mo) || !num(8, 2, d)) return false;
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return false;
  std::int64_t secs =
      days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) *
      kSecondsPerDay;
  if (s.size() > 10) {
    if (s[10] != ' ' && s[10] != 'T') return false;
    std::int64_t hh, mm, ss;
    if (s.size() < 19 || s[13] != ':' || s[16] != ':') return false;
    if (!num(11, 2, hh) || !num(14, 2, mm) || !num(17, 2, ss)) return false;
    if (hh > 23 || mm > 59 || ss > 60) return false;
    secs += hh * 3600 + mm * 60 + ss;
  }
  out = secs;
  return true;
}

std::vector<Session> finalize_sessions(
    std::vector<std::vector<Event>>&& groups,
    const std::vector<std::int64_t>& starts) {
  std::vector<Session> out;
  out.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    Session s;
    s.id = static_cast<SessionId>(i);
    s.events = std::move(groups[i]);
    for (std::size_t j = 0; j < s.events.size(); ++j) {
      s.events[j].ordinal = static_cast<std::int32_t>(j + 1);
    }
    s.start_time = starts[i];
    out.push_back(std::move(s));
  }
  return out;
}

// Groups the log per key, each group's events stably ordered by time.
std::vector<std::vector<EventLog::Entry>> group_by_key(const EventLog& log) {
  std::vector<std::vector<EventLog::Entry>> per_key(log.keys.size());
  for (const auto& e : log.events) per_key[e.key].push_back(e);
  for (auto& g : per_key) {
    std::stable_sort(g.begin(), g.end(),
                     [](const auto& a, const auto& b) { return a.time < b.time; });
  }
  return per_key;
}

std::int64_t days_to_seconds(double days) {
  return static_cast<std::int64_t>(std::llround(days * kSecondsPerDay));
}

struct SessionSpan {
  std::int64_t min_start = std::numeric_limits<std::int64_t>::max();
  std::int64_t max_end = std::numeric_limits<std::int64_t>::min();
};

SessionSpan span_of(const std::vector<Session>& sessions) {
  SessionSpan sp;
  for (const auto& s : sessions) {
    sp.min_start = std::min(sp.min_start, s.start_time);
    sp.max_end = std::max(sp.max_end, s.end_time());
  }
  return sp;
}

Session renumber(Session s) {
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    s.events[i].ordinal = static_cast<std::int32_t>(i + 1);
  }
  if (!s.events.empty()) s.start_time = s.events.front().time;
  return s;
}

}  // namespace

std::vector<RawEvent> load_events(const std::string& path,
                                  const ColumnSpec& spec) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset file: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty dataset file: " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_fields(line, spec.delimiter);
  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::runtime_error("column '" + name + "' not found in header of " +
                             path);
  };

  const std::size_t session_idx = column(spec.session_col);
  const std::size_t item_idx = column(spec.item_col);
  const bool has_time = !spec.time_col.empty();
  const std::size_t time_idx = has_time ? column(spec.time_col) : 0;

  std::vector<RawEvent> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line, spec.delimiter);
    if (fields.size() != header.size()) {
      throw std::runtime_error(line_msg("wrong field count", line_no));
    }
    RawEvent ev;
    ev.session_key = std::string(fields[session_idx]);
    ev.item = std::string(fields[item_idx]);
    ev.line_no = line_no;
    if (ev.item.empty()) {
      throw std::runtime_error(line_msg("empty item field", line_no));
    }
    if (ev.session_key.empty()) {
      throw std::runtime_error(line_msg("empty session field", line_no));
    }
    if (has_time) {
      bool ok = false;
      std::int64_t t = 0;
      switch (spec.time_format) {
        case TimeFormat::epoch_seconds:
          ok = parse_epoch(fields[time_idx], t);
          break;
        case TimeFormat::epoch_millis:
          ok = parse_epoch(fields[time_idx], t);
          if (ok) t /= 1000;
          break;
        case TimeFormat::date:
          ok = parse_date_time(fields[time_idx], t);
          break;
      }
      if (!ok) {
        throw std::runtime_error(line_msg(
            "unparseable time '" + std::string(fields[time_idx]) + "'",
            line_no));
      }
      ev.time = t;
      ev.has_time = true;
    }
    records.push_back(std::move(ev));
  }
  return records;
}

EventLog intern_items(const std::vector<RawEvent>& records) {
  EventLog log;
  log.events.reserve(records.size());
  for (const auto& r : records) {
    EventLog::Entry e;
    e.key = log.keys.intern(r.session_key);
    e.item = log.items.intern(r.item);
    e.time = r.time;
    e.has_time = r.has_time;
    log.events.push_back(e);
  }
  return log;
}

std::vector<Session> sessionize_keyed(const EventLog& log) {
  auto per_key = group_by_key(log);
  std::vector<std::vector<Event>> groups;
  std::vector<std::int64_t> starts;
  for (std::size_t key = 0; key < per_key.size(); ++key) {
    const auto& g = per_key[key];
    if (g.empty()) continue;
    std::vector<Event> events;
    events.reserve(g.size());
    const bool timed = g.front().has_time;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const std::int64_t t =
          timed ? g[j].time : static_cast<std::int64_t>(j + 1);
      events.push_back(Event{g[j].item, t, 0});
    }
    starts.push_back(timed ? events.front().time
                           : static_cast<std::int64_t>(key));
    groups.push_back(std::move(events));
  }
  return finalize_sessions(std::move(groups), starts);
}

std::vector<Session> sessionize_idle(const EventLog& log,
                                     std::int64_t idle_gap_seconds) {
  auto per_key = group_by_key(log);
  std::vector<std::vector<Event>> groups;
  std::vector<std::int64_t> starts;
  for (const auto& g : per_key) {
    std::vector<Event> cur;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!cur.empty() && g[j].time - cur.back().time > idle_gap_seconds) {
        starts.push_back(cur.front().time);
        groups.push_back(std::move(cur));
        cur.clear();
      }
      cur.push_back(Event{g[j].item, g[j].time, 0});
    }
    if (!cur.empty()) {
      starts.push_back(cur.front().time);
      groups.push_back(std::move(cur));
    }
  }
  return finalize_sessions(std::move(groups), starts);
}

std::vector<Session> sessionize_by_day(const EventLog& log) {
  auto per_key = group_by_key(log);
  std::vector<std::vector<Event>> groups;
  std::vector<std::int64_t> starts;
  auto day_of = [](std::int64_t t) {
    // floor division, correct for pre-epoch times
    return t >= 0 ? t / kSecondsPerDay : (t - kSecondsPerDay + 1) / kSecondsPerDay;
  };
  for (const auto& g : per_key) {
    std::vector<Event> cur;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!cur.empty() && day_of(g[j].time) != day_of(cur.back().time)) {
        starts.push_back(cur.front().time);
        groups.push_back(std::move(cur));
        cur.clear();
      }
      cur.push_back(Event{g[j].item, g[j].time, 0});
    }
    if (!cur.empty()) {
      starts.push_back(cur.front().time);
      groups.push_back(std::move(cur));
    }
  }
  return finalize_sessions(std::move(groups), starts);
}

std::vector<Session> filter_sessions(std::vector<Session> sessions,
                                     std::size_t min_len) {
  std::erase_if(sessions,
                [min_len](const Session& s) { return s.size() < min_len; });
  return sessions;
}

std::vector<Session> filter_min_item_support(std::vector<Session> sessions,
                                             std::int64_t min_support,
                                             std::size_t min_len) {
  if (min_support <= 1) return sessions;
  std::unordered_map<ItemId, std::int64_t> counts;
  for (const auto& s : sessions) {
    for (const auto& e : s.events) ++counts[e.item];
  }
  for (auto& s : sessions) {
    std::erase_if(s.events, [&](const Event& e) {
      return counts[e.item] < min_support;
    });
    s = renumber(std::move(s));
  }
  return filter_sessions(std::move(sessions), min_len);
}

std::vector<Slice> sliding_window_split(const std::vector<Session>& sessions,
                                        const SplitSpec& spec) {
  if (spec.n_slices < 1 || spec.train_days <= 0 || spec.test_days <= 0) {
    throw std::invalid_argument("sliding_window_split: invalid spec");
  }
  if (sessions.empty()) {
    throw std::invalid_argument("sliding_window_split: no sessions");
  }
  const std::int64_t train_secs = days_to_seconds(spec.train_days);
  const std::int64_t window = train_secs + days_to_seconds(spec.test_days);
  const auto sp = span_of(sessions);
  const std::int64_t span_secs = sp.max_end - sp.min_start + 1;
  // every slice needs data reaching into its test window
  if (span_secs <= window * (spec.n_slices - 1) + train_secs) {
    throw std::runtime_error(
        "sliding_window_split: dataset span too short for " +
        std::to_string(spec.n_slices) + " slices");
  }
  std::vector<Slice> slices(spec.n_slices);
  for (int i = 0; i < spec.n_slices; ++i) {
    slices[i].slice_index = i;
  }
  for (const Session& s : sessions) {
    const std::int64_t offset = s.start_time - sp.min_start;
    const std::int64_t w = offset / window;
    if (w < 0 || w >= spec.n_slices) continue;
    const std::int64_t base = sp.min_start + w * window;
    if (s.start_time < base + train_secs) {
      if (s.end_time() < base + train_secs) {
        slices[w].train.push_back(s);
      }
      // sessions spilling past the train window are dropped, never split
    } else {
      slices[w].test.push_back(s);
    }
  }
  return slices;
}

Slice single_split(const std::vector<Session>& sessions, double test_days) {
  if (sessions.empty()) {
    throw std::invalid_argument("single_split: no sessions");
  }
  const std::int64_t test_secs = days_to_seconds(test_days);
  const auto sp = span_of(sessions);
  if (sp.max_end - sp.min_start + 1 <= test_secs) {
    throw std::runtime_error("single_split: span does not exceed test window");
  }
  const std::int64_t cutoff = sp.max_end + 1 - test_secs;
  Slice slice;
  for (const Session& s : sessions) {
    if (s.start_time >= cutoff) {
      slice.test.push_back(s);
    } else if (s.end_time() < cutoff) {
      slice.train.push_back(s);
    }
  }
  return slice;
}

Slice random_split(const std::vector<Session>& sessions, double test_fraction,
                   std::uint64_t seed) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw std::invalid_argument("random_split: fraction must be in (0,1)");
  }
  const std::size_t n = sessions.size();
  const auto n_test = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * test_fraction));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  SeededRng rng(seed);
  for (std::size_t i = n; i > 1; --i) {  // Fisher-Yates
    const std::size_t j = rng.next_below(i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<bool> is_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;
  Slice slice;
  for (std::size_t i = 0; i < n; ++i) {
    (is_test[i] ? slice.test : slice.train).push_back(sessions[i]);
  }
  return slice;
}

Slice prune_test(Slice slice) {
  std::unordered_set<ItemId> catalog;
  for (const auto& s : slice.train) {
    for (const auto& e : s.events) catalog.insert(e.item);
  }
  std::vector<Session> pruned;
  pruned.reserve(slice.test.size());
  for (Session& s : slice.test) {
    std::erase_if(s.events,
                  [&](const Event& e) { return !catalog.contains(e.item); });
    if (s.events.size() >= 2) {
      pruned.push_back(renumber(std::move(s)));
    }
  }
  slice.test = std::move(pruned);
  return slice;
}

Slice make_validation_split(const std::vector<Session>& train,
                            const SplitSpec& spec) {
  if (spec.mode == SplitMode::random) {
    return random_split(train, spec.test_fraction, 1);
  }
  return single_split(train, spec.test_days);
}

std::vector<Session> truncate_train(const std::vector<Session>& train,
                                    double keep_days) {
  if (keep_days <= 0) {
    throw std::invalid_argument("truncate_train: keep_days must be positive");
  }
  if (train.empty()) return {};
  const auto sp = span_of(train);
  const std::int64_t cutoff = sp.max_end + 1 - days_to_seconds(keep_days);
  std::vector<Session> kept;
  for (const auto& s : train) {
    if (s.start_time >= cutoff) kept.push_back(s);
  }
  return kept;
}

void validate_slice(const Slice& slice, bool time_based) {
  auto check_session = [](const Session& s, std::size_t min_len) {
    if (s.size() < min_len) {
      throw std::logic_error("slice invariant: session shorter than " +
                             std::to_string(min_len));
    }
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      if (s.events[i].ordinal != static_cast<std::int32_t>(i + 1)) {
        throw std::logic_error("slice invariant: non-consecutive ordinals");
      }
      if (i > 0 && s.events[i].time < s.events[i - 1].time) {
        throw std::logic_error("slice invariant: events out of time order");
      }
    }
  };
  for (const auto& s : slice.train) check_session(s, 1);
  for (const auto& s : slice.test) check_session(s, 2);
  if (time_based && !slice.train.empty() && !slice.test.empty()) {
    std::int64_t max_train = std::numeric_limits<std::int64_t>::min();
    for (const auto& s : slice.train) {
      max_train = std::max(max_train, s.end_time());
    }
    std::int64_t min_test = std::numeric_limits<std::int64_t>::max();
    for (const auto& s : slice.test) {
      min_test = std::min(min_test, s.start_time);
    }
    if (max_train >= min_test) {
      throw std::logic_error("slice invariant: train events overlap test");
    }
  }
}

}  // namespace sessrec
