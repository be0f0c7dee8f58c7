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

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sessrec {

enum class LossKind { bpr, top1, bpr_max, top1_max };

LossKind loss_kind_from_string(const std::string& name);
std::string to_string(LossKind kind);

/// Loss value with analytic partial derivatives wrt the positive score and
/// each negative score.
struct LossGrad {
  double loss = 0.0;
  double d_pos = 0.0;
  std::vector<double> d_negs;
};

/// -(1/|N|) sum log sigmoid(r_pos - r_j). Throws on empty negatives.
LossGrad loss_bpr(double r_pos, std::span<const double> r_negs);

/// (1/|N|) sum sigmoid(r_j - r_pos) + sigmoid(r_j^2). Throws on empty
/// negatives.
LossGrad loss_top1(double r_pos, std::span<const double> r_negs);

/// Base loss against the softmax-weighted aggregate of the negatives, the
/// differentiable stand-in for the single highest-rated negative. `kind`
/// names the base loss (bpr or top1).
LossGrad loss_max(LossKind kind, double r_pos, std::span<const double> r_negs);

/// Dispatch on kind; the *_max kinds route through loss_max.
LossGrad ranking_loss(LossKind kind, double r_pos,
                      std::span<const double> r_negs);

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-parameter ADAGRAD: acc += g^2; p -= lr * g / (sqrt(acc) + eps).
/// Accumulators never decrease. Throws TrainingError (with the running
/// step index) on non-finite gradients.
struct AdagradState {
  double lr = 0.05;
  double eps = 1e-6;
  std::uint64_t steps = 0;
};

inline void adagrad_step(AdagradState& state, double& param, double& acc,
                         double gradient) {
  ++state.steps;
  if (!std::isfinite(gradient)) {
    throw TrainingError("non-finite gradient at optimizer step " +
                        std::to_string(state.steps));
  }
  acc += gradient * gradient;
  param -= state.lr * gradient / (std::sqrt(acc) + state.eps);
}

}  // namespace sessrec
