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

#include <string>
#include <vector>

#include <json.hpp>

#include "sessrec/eval.hpp"
#include "sessrec/ingest.hpp"
#include "sessrec/types.hpp"

namespace sessrec {

struct AlgorithmSpec {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

/// One experiment: dataset + sessionization + split + algorithm list.
/// Loaded from a JSON config file; relative dataset paths resolve against
/// the config file's directory.
struct ExperimentConfig {
  std::string name = "experiment";
  std::string dataset_path;
  ColumnSpec columns;
  std::string sessionize_mode = "keyed";  // keyed | idle | day
  std::int64_t idle_gap_seconds = 1800;
  std::int64_t min_item_support = 0;      // 0/1 = off
  std::size_t min_session_length = 2;
  SplitSpec split;
  std::vector<AlgorithmSpec> algorithms;
  std::vector<std::size_t> cutoffs = {1, 3, 5, 10, 20};
  std::uint64_t seed = 42;
  std::string output_dir = "results";
  int threads = 1;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const nlohmann::json& j,
                              const std::string& base_dir);

/// load + intern + sessionize + filters, per the config.
std::vector<Session> prepare_sessions(const ExperimentConfig& cfg);

/// Splits per the config and prunes every test set against its train
/// catalog; the Slice invariants are asserted before returning.
std::vector<Slice> prepare_slices(const ExperimentConfig& cfg,
                                  const std::vector<Session>& sessions);

/// Slice cache, one TSV per train/test side with lines
/// `session_id<TAB>item_id<TAB>epoch_seconds` sorted by (session, ordinal),
/// plus a small manifest.
void write_slice_cache(const std::string& dir,
                       const std::vector<Slice>& slices);
std::vector<Slice> load_slice_cache(const std::string& dir);

struct AlgoResult {
  std::string algorithm;
  bool ok = false;
  std::string error;
  EvalReport aggregated;
  std::vector<EvalReport> per_slice;
};

struct ExperimentOutput {
  std::vector<AlgoResult> results;
};

/// Fits and evaluates every configured algorithm on every slice. A failing
/// algorithm is recorded with its error and does not affect the others.
/// `save_models_dir`, when non-empty, writes a checkpoint per
/// (model-based algorithm, slice).
ExperimentOutput run_experiment(const ExperimentConfig& cfg,
                                const std::vector<Slice>& slices,
                                const std::string& save_models_dir = "");
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// Writes results_<name>_<k>.csv per cutoff (semicolon-delimited, rows
/// ordered by MRR at the widest cutoff), timing_<name>.csv, and
/// significance_<name>.csv comparing the two leading algorithms.
void write_result_files(const ExperimentConfig& cfg,
                        const ExperimentOutput& out,
                        const std::string& out_dir);

struct TuneSpec {
  std::string algorithm;
  nlohmann::json space = nlohmann::json::object();
  int iterations = 100;
  std::string objective = "hr@20";
};

TuneSpec load_tune_spec(const std::string& path);

struct TuneResult {
  nlohmann::json best_params;
  double best_objective = 0.0;
  std::vector<nlohmann::json> trials;
};

/// Randomized search on a validation split carved out of the first
/// slice's training data. Finite grids are sampled without replacement;
/// any continuous range switches to independent draws. Ties keep the
/// earliest draw. Throws when no trial succeeds.
TuneResult tune(const ExperimentConfig& cfg, const TuneSpec& spec);

/// Re-runs the experiment with the training window truncated to each
/// keep_days value; emits a long-format CSV
/// (algorithm;keep_days;metric;value).
void coldstart_sweep(const ExperimentConfig& cfg,
                     const std::vector<double>& keep_days,
                     const std::string& out_csv);

/// Re-formats result CSVs: rows re-sorted by the MRR column, aligned text
/// rendering returned for display.
std::string format_report_table(const std::string& results_csv_path);

/// Deterministic synthetic clickstream for smoke tests and demos.
std::vector<Session> synth_sessions(std::size_t n_sessions,
                                    std::size_t n_items, double days,
                                    std::uint64_t seed);
void write_dataset_csv(const std::string& path,
                       const std::vector<Session>& sessions);

}  // namespace sessrec
