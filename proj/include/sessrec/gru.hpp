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
#include <string>
#include <vector>

#include "sessrec/optim.hpp"
#include "sessrec/rng.hpp"
#include "sessrec/types.hpp"

namespace sessrec {

struct GruConfig {
  int hidden = 100;
  int batch = 32;
  int epochs = 10;
  LossKind loss = LossKind::bpr_max;
  double lr = 0.1;
  double dropout = 0.0;  // on the hidden-to-output connection
  double init_scale = 0.05;
  std::uint64_t seed = 42;
  double momentum = 0.0;  // accepted for config compatibility; unused
};

/// Throws std::invalid_argument on out-of-range fields.
void validate(const GruConfig& cfg);

/// Single GRU layer over one-hot item inputs. The per-gate input
/// projections are stored as item-indexed lookup tables (one column per
/// item), which realizes the one-hot multiplication as a column fetch.
struct GruParams {
  Matrix Wz, Wr, Wh;  // hidden x items
  Matrix Uz, Ur, Uh;  // hidden x hidden
  Matrix O;           // hidden x items (output projection)
  Matrix b;           // 1 x items (output bias)
};

/// One GRU cell update from hidden state h on input item x.
Vector gru_step(const GruParams& params, const Vector& h, ItemId x);

/// One step of the session-parallel schedule: parallel lanes each carry
/// one (input, target) pair from their current session. `reset[i]` flags
/// that lane i starts a new session at this step and its hidden state must
/// be zeroed first. Lanes retire when no unconsumed sessions remain, so
/// the effective batch shrinks at the tail.
struct BatchStep {
  std::vector<ItemId> inputs;
  std::vector<ItemId> targets;
  std::vector<std::uint8_t> reset;
  std::vector<std::uint32_t> lanes;     // lane index per entry
  std::vector<std::uint32_t> sessions;  // source session per entry
};

/// Schedule for one epoch. Sessions shorter than two events are skipped;
/// every adjacent (input, target) pair of the remaining sessions is
/// emitted exactly once.
std::vector<BatchStep> session_parallel_batches(
    const std::vector<Session>& sessions, std::size_t batch_size);

class GruRecommender final : public Recommender {
 public:
  explicit GruRecommender(GruConfig cfg)
      : cfg_((validate(cfg), cfg)), rng_(cfg.seed) {}

  void fit(const std::vector<Session>& train) override;
  Ranking rank(std::span<const ItemId> prefix, std::size_t k) const override;
  std::size_t memory_bytes() const override;
  std::string name() const override { return "gru4rec"; }

  std::vector<ParamBlock> param_blocks();
  std::uint64_t config_hash() const;
  const GruParams& params() const { return params_; }
  const GruConfig& config() const { return cfg_; }

  /// Mean training loss per epoch, filled by fit().
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }

  /// One lane-step with the incoming hidden state treated as data (the
  /// training scheme is one-step truncated backpropagation). `keep` is a
  /// fixed dropout mask over hidden units; empty means keep all.
  struct StepExample {
    Vector h_prev;
    ItemId input = 0;
    ItemId pos = 0;
    std::vector<ItemId> negs;
    std::vector<std::uint8_t> keep;
  };

  /// Forward + backward of one lane-step; returns the loss and the new
  /// hidden state via `h_out`. Shared by training and the gradient checks.
  double step_backward(const StepExample& ex, GradBatch& out,
                       Vector* h_out = nullptr) const;
  double step_loss(const StepExample& ex) const;

  /// Test hook: fit bookkeeping (catalog, init) without any epochs.
  void prepare(const std::vector<Session>& train);

 private:
  void run_epochs(const std::vector<Session>& train, int epochs);
  Vector output_scores(const Vector& h) const;

  GruConfig cfg_;
  SeededRng rng_;
  GruParams params_;
  std::size_t n_items_ = 0;
  std::vector<std::int64_t> popularity_;
  std::vector<ItemId> catalog_;
  std::vector<double> epoch_losses_;
};

}  // namespace sessrec
