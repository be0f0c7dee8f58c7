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

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sessrec/optim.hpp"
#include "sessrec/rng.hpp"
#include "sessrec/types.hpp"

namespace sessrec {

struct FactorModelConfig {
  int d = 100;               // latent dimension
  int epochs = 10;
  double lr = 0.05;
  double reg = 1e-4;         // L2 weight on touched parameters
  int negatives = 1;         // sampled negatives per positive
  LossKind loss = LossKind::bpr;
  double init_scale = 0.05;  // uniform init in [-scale, scale]
  std::uint64_t seed = 42;
  double alpha = 0.5;        // fism / fossil set-size normalization
  double dropout = 0.0;      // smf only
  double skip = 0.0;         // smf only
  double momentum = 0.0;     // accepted for config compatibility; unused
};

/// Throws std::invalid_argument when a field violates its invariant
/// (d >= 1, negatives >= 1, dropout/skip in [0,1), alpha in [0,1], ...).
void validate(const FactorModelConfig& cfg);

/// Shared machinery of the latent-factor models: catalog bookkeeping,
/// deterministic init, negative sampling, the training loop, and the
/// per-example gradient plumbing that the finite-difference checks hook
/// into. Concrete models define their parameter blocks, example type and
/// scoring.
class FactorModelBase : public Recommender {
 public:
  explicit FactorModelBase(FactorModelConfig cfg)
      : cfg_((validate(cfg), cfg)), rng_(cfg.seed) {}

  void fit(const std::vector<Session>& train) override;
  std::size_t memory_bytes() const override;

  /// Mutable views of every parameter matrix, checkpoint order.
  virtual std::vector<ParamBlock> param_blocks() = 0;
  std::uint64_t config_hash() const;

  const FactorModelConfig& config() const { return cfg_; }
  std::size_t catalog_size() const { return n_items_; }
  std::span<const std::int64_t> popularity() const { return popularity_; }

 protected:
  // Training examples are pre-resolved (positive, fixed negatives, context)
  // so a single code path serves SGD and the gradient checks.
  struct TrainStep {
    Eigen::Index user = 0;
    ItemId last = -1;              // previous item; -1 when unused
    ItemId pos = 0;
    std::vector<ItemId> negs;
    std::vector<ItemId> context;   // distinct item set where applicable
  };

  virtual void init_params(std::size_t n_items, std::size_t n_sessions) = 0;

  /// Appends this model's steps for one training session (sampling already
  /// resolved via rng).
  virtual void make_steps(const Session& session, Eigen::Index user,
                          std::vector<TrainStep>& out) = 0;

  /// Forward + backward for one step; gradients accumulate into `out`.
  /// Returns the loss (before regularization).
  virtual double step_backward(const TrainStep& step, GradBatch& out) = 0;

  void init_uniform(Matrix& m, std::uint64_t stream);
  std::vector<ItemId> sample_negatives(ItemId pos);
  static std::vector<ItemId> distinct_items(const Session& s);

  /// Known (in-catalog) prefix items, order preserved.
  std::vector<ItemId> known_prefix(std::span<const ItemId> prefix) const;

  /// Ranks the training catalog by a dense score vector.
  Ranking rank_catalog(const Vector& scores, std::size_t k) const;

  FactorModelConfig cfg_;
  std::size_t n_items_ = 0;
  std::size_t n_sessions_ = 0;
  std::vector<std::int64_t> popularity_;
  std::vector<ItemId> catalog_;  // items that occur in training
  SeededRng rng_;

 public:
  /// Gradient-check hooks (test support): loss and combined analytic
  /// gradient of an explicit step, regularization included.
  double check_step_loss(const TrainStep& step);
  double check_step_backward(const TrainStep& step, GradBatch& out);
  using Step = TrainStep;
};

/// Matrix factorization with sessions as users; prediction folds the
/// prefix into a user vector by averaging item factors.
class BprMfModel final : public FactorModelBase {
 public:
  explicit BprMfModel(FactorModelConfig cfg) : FactorModelBase(cfg) {}

  Ranking rank(std::span<const ItemId> prefix, std::size_t k) const override;
  std::string name() const override { return "bpr-mf"; }
  std::vector<ParamBlock> param_blocks() override;

  static TrainStep make_step(Eigen::Index user, ItemId pos,
                             std::vector<ItemId> negs);

 protected:
  void init_params(std::size_t n_items, std::size_t n_sessions) override;
  void make_steps(const Session& session, Eigen::Index user,
                  std::vector<TrainStep>& out) override;
  double step_backward(const TrainStep& step, GradBatch& out) override;

 private:
  double score(Eigen::Index user, ItemId item) const;
  Matrix W_;  // d x sessions
  Matrix H_;  // d x items
};

/// Factorized personalized Markov chain with basket size one; unseen test
/// sessions estimate their user factors as the mean of the paired item
/// factors of the prefix.
class FpmcModel final : public FactorModelBase {
 public:
  explicit FpmcModel(FactorModelConfig cfg) : FactorModelBase(cfg) {}

  Ranking rank(std::span<const ItemId> prefix, std::size_t k) const override;
  std::string name() const override { return "fpmc"; }
  std::vector<ParamBlock> param_blocks() override;

  static TrainStep make_step(Eigen::Index user, ItemId last, ItemId pos,
                             std::vector<ItemId> negs);

 protected:
  void init_params(std::size_t n_items, std::size_t n_sessions) override;
  void make_steps(const Session& session, Eigen::Index user,
                  std::vector<TrainStep>& out) override;
  double step_backward(const TrainStep& step, GradBatch& out) override;

 private:
  double score(Eigen::Index user, ItemId last, ItemId item) const;
  Matrix v_ui_, v_ul_;              // d x sessions
  Matrix v_iu_, v_il_, v_li_, v_lu_;  // d x items
};

/// Item-item factorization scored against the distinct prefix set with
/// |set|^-alpha normalization. User bias omitted (anonymous sessions).
class FismModel final : public FactorModelBase {
 public:
  explicit FismModel(FactorModelConfig cfg) : FactorModelBase(cfg) {}

  Ranking rank(std::span<const ItemId> prefix, std::size_t k) const override;
  std::string name() const override { return "fism"; }
  std::vector<ParamBlock> param_blocks() override;

  static TrainStep make_step(std::vector<ItemId> context, ItemId pos,
                             std::vector<ItemId> negs);

 protected:
  void init_params(std::size_t n_items, std::size_t n_sessions) override;
  void make_steps(const Session& session, Eigen::Index user,
                  std::vector<TrainStep>& out) override;
  double step_backward(const TrainStep& step, GradBatch& out) override;

 private:
  double score(std::span<const ItemId> context, ItemId item) const;
  Matrix P_, Q_;  // d x items
  Matrix B_;      // 1 x items (item bias)
};

/// FISM long-term term fused with a factorized Markov chain; the
/// personalized sequential weight w_u is learned per training session and
/// zero for unseen test sessions.
class FossilModel final : public FactorModelBase {
 public:
  explicit FossilModel(FactorModelConfig cfg) : FactorModelBase(cfg) {}

  Ranking rank(std::span<const ItemId> prefix, std::size_t k) const override;
  std::string name() const override { return "fossil"; }
  std::vector<ParamBlock> param_blocks() override;

  static TrainStep make_step(Eigen::Index user, std::vector<ItemId> context,
                             ItemId last, ItemId pos,
                             std::vector<ItemId> negs);

 protected:
  void init_params(std::size_t n_items, std::size_t n_sessions) override;
  void make_steps(const Session& session, Eigen::Index user,
                  std::vector<TrainStep>& out) override;
  double step_backward(const TrainStep& step, GradBatch& out) override;

 private:
  double score(Eigen::Index user, std::span<const ItemId> context, ItemId last,
               ItemId item) const;
  Matrix P_, Q_, N_, M_;  // d x items
  Matrix w_global_;       // 1 x 1
  Matrix w_user_;         // 1 x sessions
};

/// Session-based matrix factorization: an embedded binary session vector
/// blended per item with factorized sequential dynamics. Trains with the
/// max losses, session drop-out and a skip-rate.
class SmfModel final : public FactorModelBase {
 public:
  explicit SmfModel(FactorModelConfig cfg) : FactorModelBase(cfg) {}

  Ranking rank(std::span<const ItemId> prefix, std::size_t k) const override;
  std::string name() const override { return "smf"; }
  std::vector<ParamBlock> param_blocks() override;

  /// Session preference vector: sum of transformation columns of the
  /// distinct prefix items.
  Vector embed_session(std::span<const ItemId> prefix) const;

  static TrainStep make_step(std::vector<ItemId> active, ItemId last,
                             ItemId pos, std::vector<ItemId> negs);

 protected:
  void init_params(std::size_t n_items, std::size_t n_sessions) override;
  void make_steps(const Session& session, Eigen::Index user,
                  std::vector<TrainStep>& out) override;
  double step_backward(const TrainStep& step, GradBatch& out) override;

 private:
  double score_one(const Vector& s_e, ItemId last, ItemId item) const;
  Matrix MST_;          // d x items (transformation)
  Matrix Q_, N_, M_;    // d x items
  Matrix B1_, B2_;      // 1 x items
  Matrix Wraw_;         // 1 x items; mixing weight = sigmoid(raw)
};

}  // namespace sessrec
