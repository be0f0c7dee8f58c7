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

#include <Eigen/Core>
#include <string>
#include <unordered_map>
#include <vector>

#include "sessrec/losses.hpp"

namespace sessrec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Named view of one parameter matrix. Factor matrices store one entity
/// per column (items or sessions along columns, latent dimension along
/// rows); scalar and bias parameters are 1 x n matrices.
struct ParamBlock {
  std::string name;
  Matrix* mat;
};

/// Sparse per-example gradient: one dense column vector per touched
/// (block, column). Duplicate touches accumulate into a single entry, so
/// the optimizer sees the combined gradient.
class GradBatch {
 public:
  struct Entry {
    std::size_t block;
    Eigen::Index col;
    Vector grad;
  };

  /// Find-or-insert; the reference is valid only until the next call.
  Vector& at(std::size_t block, Eigen::Index col, Eigen::Index rows) {
    const std::uint64_t key = (static_cast<std::uint64_t>(block) << 40) |
                              static_cast<std::uint64_t>(col);
    auto [it, inserted] = index_.try_emplace(key, entries_.size());
    if (inserted) {
      entries_.push_back(Entry{block, col, Vector::Zero(rows)});
    }
    return entries_[it->second].grad;
  }

  void clear() {
    entries_.clear();
    index_.clear();
  }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// Adds lambda * ||col||^2 to the loss for every column already touched by
/// the batch and folds 2 * lambda * col into its gradient. Returns the
/// added loss.
inline double apply_l2(const std::vector<ParamBlock>& blocks, GradBatch& batch,
                       double lambda) {
  if (lambda == 0.0) return 0.0;
  double added = 0.0;
  for (auto& e : batch.entries()) {
    const auto col = blocks[e.block].mat->col(e.col);
    added += lambda * col.squaredNorm();
    e.grad += 2.0 * lambda * col;
  }
  return added;
}

/// Elementwise ADAGRAD over a set of parameter blocks.
class Adagrad {
 public:
  Adagrad(double lr, double eps, const std::vector<ParamBlock>& blocks) {
    state_.lr = lr;
    state_.eps = eps;
    acc_.reserve(blocks.size());
    for (const auto& b : blocks) {
      acc_.push_back(Matrix::Zero(b.mat->rows(), b.mat->cols()));
    }
  }

  void apply(const std::vector<ParamBlock>& blocks, const GradBatch& batch) {
    ++state_.steps;
    for (const auto& e : batch.entries()) {
      if (!e.grad.allFinite()) {
        throw TrainingError("non-finite gradient in block '" +
                            blocks[e.block].name + "' at training step " +
                            std::to_string(state_.steps));
      }
      auto acc = acc_[e.block].col(e.col).array();
      acc += e.grad.array().square();
      blocks[e.block].mat->col(e.col).array() -=
          state_.lr * e.grad.array() / (acc.sqrt() + state_.eps);
    }
  }

  std::uint64_t steps() const { return state_.steps; }

 private:
  std::vector<Matrix> acc_;
  AdagradState state_;
};

}  // namespace sessrec
