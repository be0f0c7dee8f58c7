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
#include "sessrec/losses.hpp"

#include "sessrec/math.hpp"

namespace sessrec {

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "bpr") return LossKind::bpr;
  if (name == "top1") return LossKind::top1;
  if (name == "bpr_max" || name == "bpr-max") return LossKind::bpr_max;
  if (name == "top1_max" || name == "top1-max") return LossKind::top1_max;
  throw std::invalid_argument("unknown loss: " + name);
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::bpr: return "bpr";
    case LossKind::top1: return "top1";
    case LossKind::bpr_max: return "bpr_max";
    case LossKind::top1_max: return "top1_max";
  }
  return "?";
}

namespace {

void require_negs(std::span<const double> r_negs, const char* who) {
  if (r_negs.empty()) {
    throw std::invalid_argument(std::string(who) + ": no negative samples");
  }
}

// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace

LossGrad loss_bpr(double r_pos, std::span<const double> r_negs) {
  require_negs(r_negs, "loss_bpr");
  const double inv_n = 1.0 / static_cast<double>(r_negs.size());
  LossGrad out;
  out.d_negs.resize(r_negs.size());
  for (std::size_t j = 0; j < r_negs.size(); ++j) {
    const double diff = r_pos - r_negs[j];
    out.loss -= inv_n * log_sigmoid(diff);
    const double s = sigmoid(-diff);  // 1 - sigmoid(diff)
    out.d_pos -= inv_n * s;
    out.d_negs[j] = inv_n * s;
  }
  return out;
}

LossGrad loss_top1(double r_pos, std::span<const double> r_negs) {
  require_negs(r_negs, "loss_top1");
  const double inv_n = 1.0 / static_cast<double>(r_negs.size());
  LossGrad out;
  out.d_negs.resize(r_negs.size());
  for (std::size_t j = 0; j < r_negs.size(); ++j) {
    const double rj = r_negs[j];
    const double rank_term = sigmoid(rj - r_pos);
    const double reg_term = sigmoid(rj * rj);
    out.loss += inv_n * (rank_term + reg_term);
    const double d_rank = sigmoid_grad(rank_term);
    out.d_pos -= inv_n * d_rank;
    out.d_negs[j] = inv_n * (d_rank + sigmoid_grad(reg_term) * 2.0 * rj);
  }
  return out;
}

LossGrad loss_max(LossKind kind, double r_pos,
                  std::span<const double> r_negs) {
  require_negs(r_negs, "loss_max");
  if (kind != LossKind::bpr && kind != LossKind::top1) {
    throw std::invalid_argument("loss_max: base must be bpr or top1");
  }
  const auto weights = softmax(r_negs);
  double aggregate = 0.0;
  for (std::size_t j = 0; j < r_negs.size(); ++j) {
    aggregate += weights[j] * r_negs[j];
  }
  const double agg_arr[1] = {aggregate};
  const LossGrad base = kind == LossKind::bpr ? loss_bpr(r_pos, agg_arr)
                                              : loss_top1(r_pos, agg_arr);
  LossGrad out;
  out.loss = base.loss;
  out.d_pos = base.d_pos;
  out.d_negs.resize(r_negs.size());
  // d aggregate / d r_j = w_j * (1 + r_j - aggregate)
  for (std::size_t j = 0; j < r_negs.size(); ++j) {
    out.d_negs[j] =
        base.d_negs[0] * weights[j] * (1.0 + r_negs[j] - aggregate);
  }
  return out;
}

LossGrad ranking_loss(LossKind kind, double r_pos,
                      std::span<const double> r_negs) {
  switch (kind) {
    case LossKind::bpr: return loss_bpr(r_pos, r_negs);
    case LossKind::top1: return loss_top1(r_pos, r_negs);
    case LossKind::bpr_max: return loss_max(LossKind::bpr, r_pos, r_negs);
    case LossKind::top1_max: return loss_max(LossKind::top1, r_pos, r_negs);
  }
  throw std::invalid_argument("ranking_loss: bad kind");
}

}  // namespace sessrec
