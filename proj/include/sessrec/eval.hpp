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
#include <span>
#include <vector>

#include "sessrec/types.hpp"

namespace sessrec {

/// Raw training occurrence counts with min-max normalized scores in
/// [0, 1]. When all counts are equal every score degenerates to 0.
class PopularityTable {
 public:
  PopularityTable() = default;
  explicit PopularityTable(const std::vector<Session>& train);

  double score(ItemId item) const {
    return item >= 0 && static_cast<std::size_t>(item) < normalized_.size()
               ? normalized_[item]
               : 0.0;
  }
  std::int64_t count(ItemId item) const {
    return item >= 0 && static_cast<std::size_t>(item) < counts_.size()
               ? counts_[item]
               : 0;
  }
  std::size_t catalog_size() const { return n_catalog_; }
  std::span<const std::int64_t> counts() const { return counts_; }

 private:
  std::vector<std::int64_t> counts_;
  std::vector<double> normalized_;
  std::size_t n_catalog_ = 0;  // items with count > 0
};

/// One prediction point of the iterative revealing protocol: the prefix of
/// length `step` was revealed, the model produced `top_items`, and the
/// immediate next item sat at `target_rank` (1-based; 0 = not in the
/// list). `remaining` holds the distinct items of the hidden continuation.
struct StepOutcome {
  std::uint32_t session_index = 0;
  std::uint32_t step = 0;
  int target_rank = 0;
  std::vector<ItemId> top_items;
  std::vector<ItemId> remaining;
};

/// Reveals each test session one event at a time; a session of length m
/// yields exactly m-1 outcomes, each ranked at list length k_max.
std::vector<StepOutcome> next_item_eval(const Recommender& model,
                                        const std::vector<Session>& test,
                                        std::size_t k_max);

struct HrMrr {
  double hr = 0.0;
  double mrr = 0.0;
};

/// Hit rate and mean reciprocal rank at cutoff k. Throws on empty records.
HrMrr hr_mrr(std::span<const StepOutcome> records, std::size_t k);

struct PrecRec {
  double precision = 0.0;
  double recall = 0.0;
};

/// Precision/recall of the top-k against the distinct remaining session
/// items, averaged over all steps.
PrecRec remaining_items_pr(std::span<const StepOutcome> records,
                           std::size_t k);
PrecRec remaining_items_eval(const Recommender& model,
                             const std::vector<Session>& test, std::size_t k);

/// Distinct items ever recommended in the top-k, over the training
/// catalog size.
double coverage(std::span<const StepOutcome> records, std::size_t k,
                std::size_t catalog_size);

/// Mean normalized popularity over every recommended top-k slot.
double popularity_bias(std::span<const StepOutcome> records, std::size_t k,
                       const PopularityTable& pop);

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double p_value = 1.0;
  bool significant = false;
  std::size_t n = 0;  // non-zero differences used
};

/// Two-sided Wilcoxon signed-rank test over paired samples. Zero
/// differences are dropped, tied absolute differences get averaged ranks.
/// Exact distribution for n <= 25, normal approximation with tie
/// correction and continuity correction beyond. Throws when fewer than 6
/// non-zero differences remain.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a,
                                    std::span<const double> b,
                                    double alpha = 0.05);

struct MetricRow {
  double hr = 0.0;
  double mrr = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double cov = 0.0;
  double pop = 0.0;
};

/// Per-slice (or slice-averaged) measurement results for one algorithm.
struct EvalReport {
  std::vector<std::size_t> cutoffs;
  std::vector<MetricRow> metrics;  // aligned with cutoffs
  /// Per test session, the 1-based rank (0 = miss) of each step's target
  /// at the widest cutoff; feeds the significance tests.
  std::vector<std::vector<int>> session_ranks;
  std::size_t n_steps = 0;
  double fit_seconds = 0.0;
  double predict_ms_mean = 0.0;
  double predict_ms_median = 0.0;
  std::size_t memory_bytes = 0;

  /// Mean reciprocal rank per session at cutoff k (pairing unit for the
  /// significance test).
  std::vector<double> per_session_mrr(std::size_t k) const;
};

/// Full protocol pass: iterative revealing with all metrics at every
/// cutoff. Cutoffs must be sorted ascending. `threads` > 1 fans the test
/// sessions out over a worker pool; per-session outcomes are identical to
/// the serial run and aggregates are deterministic for a fixed thread
/// count (metric sums reassociate across workers, which can move the last
/// bits). Prediction latencies are collected per rank() call.
EvalReport evaluate(const Recommender& model,
                    const std::vector<Session>& test,
                    std::span<const std::size_t> cutoffs,
                    const PopularityTable& pop, int threads = 1);

/// Unweighted mean of the per-cutoff metrics across slices; rank records
/// are concatenated.
EvalReport aggregate_slices(std::span<const EvalReport> reports);

}  // namespace sessrec
