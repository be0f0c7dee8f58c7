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
#include <string>
#include <vector>

#include "sessrec/types.hpp"

namespace sessrec {

constexpr std::int64_t kSecondsPerDay = 86400;

enum class TimeFormat { epoch_seconds, epoch_millis, date };

/// Names the session/user, item and time columns of a delimited text file.
/// A header row is required. An empty time_col declares a dataset without
/// timestamps (playlists); ordinals then stand in for times.
struct ColumnSpec {
  std::string session_col = "SessionId";
  std::string item_col = "ItemId";
  std::string time_col = "Time";
  char delimiter = ',';
  TimeFormat time_format = TimeFormat::epoch_seconds;
};

struct RawEvent {
  std::string session_key;
  std::string item;
  std::int64_t time = 0;
  bool has_time = false;
  std::size_t line_no = 0;  // 1-based line in the source file
};

/// Raw events with interned item and session-key ids, still unsessionized.
struct EventLog {
  struct Entry {
    std::int32_t key = 0;
    ItemId item = 0;
    std::int64_t time = 0;
    bool has_time = false;
  };
  std::vector<Entry> events;  // in record order
  StringInterner items;
  StringInterner keys;
};

/// Parses a delimited file per `spec`, one record per data row in file
/// order. Throws on missing file, missing columns, empty item fields and
/// unparseable times, naming the offending line.
std::vector<RawEvent> load_events(const std::string& path,
                                  const ColumnSpec& spec);

/// Assigns dense ids in order of first appearance.
EventLog intern_items(const std::vector<RawEvent>& records);

/// One session per key, events kept in record order. For records without
/// timestamps the ordinal substitutes for the event time and the session
/// start_time is the key's insertion index.
std::vector<Session> sessionize_keyed(const EventLog& log);

/// Splits each key's chronologically ordered events whenever the gap
/// between consecutive events exceeds idle_gap_seconds (strictly).
std::vector<Session> sessionize_idle(const EventLog& log,
                                     std::int64_t idle_gap_seconds = 1800);

/// One session per (key, UTC calendar day).
std::vector<Session> sessionize_by_day(const EventLog& log);

std::vector<Session> filter_sessions(std::vector<Session> sessions,
                                     std::size_t min_len = 2);

/// Drops events whose item occurs fewer than min_support times overall,
/// then re-applies the length filter. min_support <= 1 is a no-op.
std::vector<Session> filter_min_item_support(std::vector<Session> sessions,
                                             std::int64_t min_support,
                                             std::size_t min_len = 2);

enum class SplitMode { sliding_window, single, random };

struct SplitSpec {
  SplitMode mode = SplitMode::sliding_window;
  int n_slices = 5;
  double train_days = 30.0;
  double test_days = 1.0;
  double test_fraction = 0.2;  // random mode only
};

/// One train/test pair. In time-based modes every train event strictly
/// precedes every test session start, and sessions are never split
/// across the boundary.
struct Slice {
  std::vector<Session> train;
  std::vector<Session> test;
  int slice_index = 0;
};

/// Tiles n_slices windows of (train_days + test_days) from the dataset
/// start with zero gap. Sessions are assigned to windows by start_time;
/// train sessions whose events would spill past the train window are
/// dropped rather than split. Throws when the span is too short.
std::vector<Slice> sliding_window_split(const std::vector<Session>& sessions,
                                        const SplitSpec& spec);

/// Train = sessions ending before the cutoff (span end minus test_days);
/// test = sessions starting at or after it. Throws when span <= test_days.
Slice single_split(const std::vector<Session>& sessions, double test_days);

/// Seeded shuffle; floor(n * test_fraction) sessions go to test.
Slice random_split(const std::vector<Session>& sessions, double test_fraction,
                   std::uint64_t seed);

/// Removes test events whose item is absent from the train catalog and
/// drops test sessions left with fewer than two events. Ordinals are
/// renumbered.
Slice prune_test(Slice slice);

/// Carves a validation slice out of a training set: single_split with the
/// same test_days for time-based modes, random_split for random mode.
Slice make_validation_split(const std::vector<Session>& train,
                            const SplitSpec& spec);

/// Keeps only sessions starting within the last keep_days of the
/// training window.
std::vector<Session> truncate_train(const std::vector<Session>& train,
                                    double keep_days);

/// Asserts the Slice invariants; throws std::logic_error on violation.
/// `time_based` additionally enforces the train/test time ordering.
void validate_slice(const Slice& slice, bool time_based);

}  // namespace sessrec
