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
#include "sessrec/factorize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sessrec/math.hpp"

namespace sessrec {

namespace {

bool in_sorted(std::span<const ItemId> sorted, ItemId item) {
  return std::binary_search(sorted.begin(), sorted.end(), item);
}

std::vector<double> score_negatives(const std::vector<ItemId>& negs,
                                    auto&& score_fn) {
  std::vector<double> out(negs.size());
  for (std::size_t j = 0; j < negs.size(); ++j) out[j] = score_fn(negs[j]);
  return out;
}

}  // namespace

void validate(const FactorModelConfig& cfg) {
  if (cfg.d < 1) throw std::invalid_argument("factor config: d must be >= 1");
  if (cfg.epochs < 0) {
    throw std::invalid_argument("factor config: epochs must be >= 0");
  }
  if (cfg.negatives < 1) {
    throw std::invalid_argument("factor config: negatives must be >= 1");
  }
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) {
    throw std::invalid_argument("factor config: dropout must be in [0, 1)");
  }
  if (cfg.skip < 0.0 || cfg.skip > 1.0) {
    throw std::invalid_argument("factor config: skip must be in [0, 1]");
  }
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0) {
    throw std::invalid_argument("factor config: alpha must be in [0, 1]");
  }
  if (cfg.lr <= 0.0) {
    throw std::invalid_argument("factor config: lr must be positive");
  }
  if (cfg.reg < 0.0 || cfg.init_scale < 0.0) {
    throw std::invalid_argument(
        "factor config: reg and init_scale must be non-negative");
  }
}

void FactorModelBase::fit(const std::vector<Session>& train) {
  if (train.empty()) {
    throw std::invalid_argument(name() + ": empty training set");
  }
  ItemId max_id = -1;
  for (const auto& s : train) {
    for (const auto& e : s.events) max_id = std::max(max_id, e.item);
  }
  n_items_ = static_cast<std::size_t>(max_id + 1);
  n_sessions_ = train.size();
  popularity_.assign(n_items_, 0);
  for (const auto& s : train) {
    for (const auto& e : s.events) ++popularity_[e.item];
  }
  catalog_.clear();
  for (std::size_t i = 0; i < n_items_; ++i) {
    if (popularity_[i] > 0) catalog_.push_back(static_cast<ItemId>(i));
  }
  if (catalog_.size() < 2) {
    throw TrainingError(name() + ": catalog too small to sample negatives");
  }

  init_params(n_items_, n_sessions_);
  auto blocks = param_blocks();
  Adagrad opt(cfg_.lr, 1e-6, blocks);
  GradBatch batch;
  std::vector<TrainStep> steps;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    for (std::size_t u = 0; u < train.size(); ++u) {
      steps.clear();
      make_steps(train[u], static_cast<Eigen::Index>(u), steps);
      for (const auto& st : steps) {
        batch.clear();
        step_backward(st, batch);
        apply_l2(blocks, batch, cfg_.reg);
        opt.apply(blocks, batch);
      }
    }
    for (const auto& b : blocks) {
      if (!b.mat->allFinite()) {
        throw TrainingError(name() + ": non-finite parameters in '" + b.name +
                            "' after epoch " + std::to_string(epoch + 1));
      }
    }
  }
}

std::size_t FactorModelBase::memory_bytes() const {
  std::size_t bytes = popularity_.capacity() * sizeof(std::int64_t) +
                      catalog_.capacity() * sizeof(ItemId);
  for (const auto& b : const_cast<FactorModelBase*>(this)->param_blocks()) {
    bytes += static_cast<std::size_t>(b.mat->size()) * sizeof(double);
  }
  return bytes;
}

std::uint64_t FactorModelBase::config_hash() const {
  const std::string canon =
      name() + "|d=" + std::to_string(cfg_.d) +
      "|epochs=" + std::to_string(cfg_.epochs) +
      "|lr=" + std::to_string(cfg_.lr) + "|reg=" + std::to_string(cfg_.reg) +
      "|negs=" + std::to_string(cfg_.negatives) +
      "|loss=" + to_string(cfg_.loss) +
      "|init=" + std::to_string(cfg_.init_scale) +
      "|seed=" + std::to_string(cfg_.seed) +
      "|alpha=" + std::to_string(cfg_.alpha) +
      "|dropout=" + std::to_string(cfg_.dropout) +
      "|skip=" + std::to_string(cfg_.skip);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const char c : canon) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void FactorModelBase::init_uniform(Matrix& m, std::uint64_t stream) {
  SeededRng r = rng_.split(stream + 1000);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index row = 0; row < m.rows(); ++row) {
      m(row, c) = r.next_double(-cfg_.init_scale, cfg_.init_scale);
    }
  }
}

std::vector<ItemId> FactorModelBase::sample_negatives(ItemId pos) {
  std::vector<ItemId> negs(static_cast<std::size_t>(cfg_.negatives));
  for (auto& n : negs) {
    do {
      n = catalog_[rng_.next_below(catalog_.size())];
    } while (n == pos);
  }
  return negs;
}

std::vector<ItemId> FactorModelBase::distinct_items(const Session& s) {
  std::vector<ItemId> out;
  out.reserve(s.events.size());
  for (const auto& e : s.events) out.push_back(e.item);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ItemId> FactorModelBase::known_prefix(
    std::span<const ItemId> prefix) const {
  std::vector<ItemId> out;
  out.reserve(prefix.size());
  for (const ItemId i : prefix) {
    if (i >= 0 && static_cast<std::size_t>(i) < n_items_ &&
        popularity_[i] > 0) {
      out.push_back(i);
    }
  }
  return out;
}

Ranking FactorModelBase::rank_catalog(const Vector& scores,
                                      std::size_t k) const {
  std::vector<Scored> flat;
  flat.reserve(catalog_.size());
  for (const ItemId item : catalog_) flat.push_back({item, scores[item]});
  return top_k_ranking(std::move(flat), k, popularity_);
}

double FactorModelBase::check_step_loss(const TrainStep& step) {
  GradBatch scratch;
  const double base = step_backward(step, scratch);
  if (cfg_.reg == 0.0) return base;
  double reg_loss = 0.0;
  auto blocks = param_blocks();
  for (const auto& e : scratch.entries()) {
    reg_loss += cfg_.reg * blocks[e.block].mat->col(e.col).squaredNorm();
  }
  return base + reg_loss;
}

double FactorModelBase::check_step_backward(const TrainStep& step,
                                            GradBatch& out) {
  const double base = step_backward(step, out);
  return base + apply_l2(param_blocks(), out, cfg_.reg);
}

// ---------------------------------------------------------------------------
// BPR-MF

void BprMfModel::init_params(std::size_t n_items, std::size_t n_sessions) {
  W_.resize(cfg_.d, static_cast<Eigen::Index>(n_sessions));
  H_.resize(cfg_.d, static_cast<Eigen::Index>(n_items));
  init_uniform(W_, 0);
  init_uniform(H_, 1);
}

std::vector<ParamBlock> BprMfModel::param_blocks() {
  return {{"W", &W_}, {"H", &H_}};
}

FactorModelBase::TrainStep BprMfModel::make_step(Eigen::Index user, ItemId pos,
                                                 std::vector<ItemId> negs) {
  TrainStep st;
  st.user = user;
  st.pos = pos;
  st.negs = std::move(negs);
  return st;
}

void BprMfModel::make_steps(const Session& session, Eigen::Index user,
                            std::vector<TrainStep>& out) {
  for (const auto& e : session.events) {
    out.push_back(make_step(user, e.item, sample_negatives(e.item)));
  }
}

double BprMfModel::score(Eigen::Index user, ItemId item) const {
  return W_.col(user).dot(H_.col(item));
}

double BprMfModel::step_backward(const TrainStep& step, GradBatch& out) {
  const double r_pos = score(step.user, step.pos);
  const auto r_negs = score_negatives(
      step.negs, [&](ItemId i) { return score(step.user, i); });
  const LossGrad lg = ranking_loss(cfg_.loss, r_pos, r_negs);

  Vector d_user = lg.d_pos * H_.col(step.pos);
  for (std::size_t j = 0; j < step.negs.size(); ++j) {
    d_user += lg.d_negs[j] * H_.col(step.negs[j]);
  }
  out.at(0, step.user, cfg_.d) += d_user;
  out.at(1, step.pos, cfg_.d) += lg.d_pos * W_.col(step.user);
  for (std::size_t j = 0; j < step.negs.size(); ++j) {
    out.at(1, step.negs[j], cfg_.d) += lg.d_negs[j] * W_.col(step.user);
  }
  return lg.loss;
}

Ranking BprMfModel::rank(std::span<const ItemId> prefix,
                         std::size_t k) const {
  if (prefix.empty()) {
    throw std::invalid_argument("bpr-mf: empty prefix");
  }
  const auto known = known_prefix(prefix);
  Vector user = Vector::Zero(cfg_.d);
  if (!known.empty()) {
    for (const ItemId i : known) user += H_.col(i);
    user /= static_cast<double>(known.size());
  }
  const Vector scores = H_.transpose() * user;
  return rank_catalog(scores, k);
}

// ---------------------------------------------------------------------------
// FPMC

void FpmcModel::init_params(std::size_t n_items, std::size_t n_sessions) {
  const auto ni = static_cast<Eigen::Index>(n_items);
  const auto ns = static_cast<Eigen::Index>(n_sessions);
  v_ui_.resize(cfg_.d, ns);
  v_iu_.resize(cfg_.d, ni);
  v_il_.resize(cfg_.d, ni);
  v_li_.resize(cfg_.d, ni);
  v_ul_.resize(cfg_.d, ns);
  v_lu_.resize(cfg_.d, ni);
  init_uniform(v_ui_, 0);
  init_uniform(v_iu_, 1);
  init_uniform(v_il_, 2);
  init_uniform(v_li_, 3);
  init_uniform(v_ul_, 4);
  init_uniform(v_lu_, 5);
}

std::vector<ParamBlock> FpmcModel::param_blocks() {
  return {{"v_ui", &v_ui_}, {"v_iu", &v_iu_}, {"v_il", &v_il_},
          {"v_li", &v_li_}, {"v_ul", &v_ul_}, {"v_lu", &v_lu_}};
}

FactorModelBase::TrainStep FpmcModel::make_step(Eigen::Index user, ItemId last,
                                                ItemId pos,
                                                std::vector<ItemId> negs) {
  TrainStep st;
  st.user = user;
  st.last = last;
  st.pos = pos;
  st.negs = std::move(negs);
  return st;
}

void FpmcModel::make_steps(const Session& session, Eigen::Index user,
                           std::vector<TrainStep>& out) {
  const auto& ev = session.events;
  for (std::size_t t = 1; t < ev.size(); ++t) {
    out.push_back(make_step(user, ev[t - 1].item, ev[t].item,
                            sample_negatives(ev[t].item)));
  }
}

double FpmcModel::score(Eigen::Index user, ItemId last, ItemId item) const {
  return v_ui_.col(user).dot(v_iu_.col(item)) +
         v_il_.col(item).dot(v_li_.col(last)) +
         v_ul_.col(user).dot(v_lu_.col(last));
}

double FpmcModel::step_backward(const TrainStep& step, GradBatch& out) {
  const double r_pos = score(step.user, step.last, step.pos);
  const auto r_negs = score_negatives(step.negs, [&](ItemId i) {
    return score(step.user, step.last, i);
  });
  const LossGrad lg = ranking_loss(cfg_.loss, r_pos, r_negs);

  double d_sum = lg.d_pos;
  Vector d_vui = lg.d_pos * v_iu_.col(step.pos);
  Vector d_vli = lg.d_pos * v_il_.col(step.pos);
  out.at(1, step.pos, cfg_.d) += lg.d_pos * v_ui_.col(step.user);
  out.at(2, step.pos, cfg_.d) += lg.d_pos * v_li_.col(step.last);
  for (std::size_t j = 0; j < step.negs.size(); ++j) {
    const double dj = lg.d_negs[j];
    d_sum += dj;
    d_vui += dj * v_iu_.col(step.negs[j]);
    d_vli += dj * v_il_.col(step.negs[j]);
    out.at(1, step.negs[j], cfg_.d) += dj * v_ui_.col(step.user);
    out.at(2, step.negs[j], cfg_.d) += dj * v_li_.col(step.last);
  }
  out.at(0, step.user, cfg_.d) += d_vui;
  out.at(3, step.last, cfg_.d) += d_vli;
  // the (U,L) x (L,U) term is constant across candidate items, so its
  // gradient carries the summed coefficient (zero for plain bpr pairs)
  out.at(4, step.user, cfg_.d) += d_sum * v_lu_.col(step.last);
  out.at(5, step.last, cfg_.d) += d_sum * v_ul_.col(step.user);
  return lg.loss;
}

Ranking FpmcModel::rank(std::span<const ItemId> prefix, std::size_t k) const {
  if (prefix.empty()) {
    throw std::invalid_argument("fpmc: empty prefix");
  }
  const auto known = known_prefix(prefix);
  // cold-start user factors: mean of the paired item-side factors
  Vector u_ui = Vector::Zero(cfg_.d);
  Vector u_ul = Vector::Zero(cfg_.d);
  if (!known.empty()) {
    for (const ItemId i : known) {
      u_ui += v_iu_.col(i);
      u_ul += v_lu_.col(i);
    }
    u_ui /= static_cast<double>(known.size());
    u_ul /= static_cast<double>(known.size());
  }
  Vector scores = v_iu_.transpose() * u_ui;
  if (!known.empty()) {
    const ItemId last = known.back();
    scores += v_il_.transpose() * v_li_.col(last);
    scores.array() += u_ul.dot(v_lu_.col(last));
  }
  return rank_catalog(scores, k);
}

// ---------------------------------------------------------------------------
// FISM

void FismModel::init_params(std::size_t n_items, std::size_t) {
  const auto ni = static_cast<Eigen::Index>(n_items);
  P_.resize(cfg_.d, ni);
  Q_.resize(cfg_.d, ni);
  B_.resize(1, ni);
  init_uniform(P_, 0);
  init_uniform(Q_, 1);
  B_.setZero();
}

std::vector<ParamBlock> FismModel::param_blocks() {
  return {{"P", &P_}, {"Q", &Q_}, {"B", &B_}};
}

FactorModelBase::TrainStep FismModel::make_step(std::vector<ItemId> context,
                                                ItemId pos,
                                                std::vector<ItemId> negs) {
  TrainStep st;
  st.context = std::move(context);
  st.pos = pos;
  st.negs = std::move(negs);
  return st;
}

void FismModel::make_steps(const Session& session, Eigen::Index,
                           std::vector<TrainStep>& out) {
  const auto ctx = distinct_items(session);
  for (const auto& e : session.events) {
    out.push_back(make_step(ctx, e.item, sample_negatives(e.item)));
  }
}

double FismModel::score(std::span<const ItemId> context, ItemId item) const {
  if (context.empty()) return B_(0, item);
  Vector sum = Vector::Zero(cfg_.d);
  for (const ItemId j : context) {
    if (j != item) sum += P_.col(j);
  }
  const double c = std::pow(static_cast<double>(context.size()), -cfg_.alpha);
  return B_(0, item) + c * sum.dot(Q_.col(item));
}

double FismModel::step_backward(const TrainStep& step, GradBatch& out) {
  const auto& ctx = step.context;
  const double c =
      ctx.empty() ? 0.0
                  : std::pow(static_cast<double>(ctx.size()), -cfg_.alpha);
  Vector full_sum = Vector::Zero(cfg_.d);
  for (const ItemId j : ctx) full_sum += P_.col(j);

  auto score_fast = [&](ItemId i) {
    if (ctx.empty()) return B_(0, i);
    Vector s = full_sum;
    if (in_sorted(ctx, i)) s -= P_.col(i);
    return B_(0, i) + c * s.dot(Q_.col(i));
  };
  const double r_pos = score_fast(step.pos);
  const auto r_negs = score_negatives(step.negs, score_fast);
  const LossGrad lg = ranking_loss(cfg_.loss, r_pos, r_negs);

  Vector p_total = Vector::Zero(cfg_.d);
  std::vector<std::pair<ItemId, Vector>> self_terms;
  auto add_item = [&](ItemId i, double d_i) {
    out.at(2, i, 1)(0) += d_i;  // bias
    if (ctx.empty()) return;
    Vector s = full_sum;
    if (in_sorted(ctx, i)) s -= P_.col(i);
    out.at(1, i, cfg_.d) += d_i * c * s;
    const Vector vec = d_i * c * Q_.col(i);
    p_total += vec;
    if (in_sorted(ctx, i)) self_terms.emplace_back(i, vec);
  };
  add_item(step.pos, lg.d_pos);
  for (std::size_t j = 0; j < step.negs.size(); ++j) {
    add_item(step.negs[j], lg.d_negs[j]);
  }
  for (const ItemId j : ctx) {
    Vector g = p_total;
    for (const auto& [item, vec] : self_terms) {
      if (item == j) g -= vec;
    }
    out.at(0, j, cfg_.d) += g;
  }
  return lg.loss;
}

Ranking FismModel::rank(std::span<const ItemId> prefix, std::size_t k) const {
  if (prefix.empty()) {
    throw std::invalid_argument("fism: empty prefix");
  }
  auto ctx = known_prefix(prefix);
  std::sort(ctx.begin(), ctx.end());
  ctx.erase(std::unique(ctx.begin(), ctx.end()), ctx.end());
  Vector scores = B_.transpose();
  if (!ctx.empty()) {
    const double c = std::pow(static_cast<double>(ctx.size()), -cfg_.alpha);
    Vector sum = Vector::Zero(cfg_.d);
    for (const ItemId j : ctx) sum += P_.col(j);
    scores += c * (Q_.transpose() * sum);
    for (const ItemId j : ctx) {
      scores[j] -= c * P_.col(j).dot(Q_.col(j));
    }
  }
  return rank_catalog(scores, k);
}

// ---------------------------------------------------------------------------
// FOSSIL

void FossilModel::init_params(std::size_t n_items, std::size_t n_sessions) {
  const auto ni = static_cast<Eigen::Index>(n_items);
  P_.resize(cfg_.d, ni);
  Q_.resize(cfg_.d, ni);
  N_.resize(cfg_.d, ni);
  M_.resize(cfg_.d, ni);
  w_global_.resize(1, 1);
  w_user_.resize(1, static_cast<Eigen::Index>(n_sessions));
  init_uniform(P_, 0);
  init_uniform(Q_, 1);
  init_uniform(N_, 2);
  init_uniform(M_, 3);
  w_global_.setZero();
  w_user_.setZero();
}

std::vector<ParamBlock> FossilModel::param_blocks() {
  return {{"P", &P_}, {"Q", &Q_},        {"N", &N_},
          {"M", &M_}, {"w", &w_global_}, {"w_user", &w_user_}};
}

FactorModelBase::TrainStep FossilModel::make_step(Eigen::Index user,
                                                  std::vector<ItemId> context,
                                                  ItemId last, ItemId pos,
                                                  std::vector<ItemId> negs) {
  TrainStep st;
  st.user = user;
  st.context = std::move(context);
  st.last = last;
  st.pos = pos;
  st.negs = std::move(negs);
  return st;
}

void FossilModel::make_steps(const Session& session, Eigen::Index user,
                             std::vector<TrainStep>& out) {
  const auto ctx = distinct_items(session);
  const auto& ev = session.events;
  for (std::size_t t = 1; t < ev.size(); ++t) {
    out.push_back(make_step(user, ctx, ev[t - 1].item, ev[t].item,
                            sample_negatives(ev[t].item)));
  }
}

double FossilModel::score(Eigen::Index user, std::span<const ItemId> context,
                          ItemId last, ItemId item) const {
  double r = 0.0;
  if (!context.empty()) {
    Vector sum = Vector::Zero(cfg_.d);
    for (const ItemId j : context) {
      if (j != item) sum += P_.col(j);
    }
    const double c =
        std::pow(static_cast<double>(context.size()), -cfg_.alpha);
    r += c * sum.dot(Q_.col(item));
  }
  const double w = w_global_(0, 0) + (user >= 0 ? w_user_(0, user) : 0.0);
  if (last >= 0) r += w * N_.col(last).dot(M_.col(item));
  return r;
}

double FossilModel::step_backward(const TrainStep& step, GradBatch& out) {
  const auto& ctx = step.context;
  const double c =
      ctx.empty() ? 0.0
                  : std::pow(static_cast<double>(ctx.size()), -cfg_.alpha);
  Vector full_sum = Vector::Zero(cfg_.d);
  for (const ItemId j : ctx) full_sum += P_.col(j);
  const double w = w_global_(0, 0) + w_user_(0, step.user);
  const Vector nl = N_.col(step.last);

  auto score_fast = [&](ItemId i) {
    double r = w * nl.dot(M_.col(i));
    if (!ctx.empty()) {
      Vector s = full_sum;
      if (in_sorted(ctx, i)) s -= P_.col(i);
      r += c * s.dot(Q_.col(i));
    }
    return r;
  };
  const double r_pos = score_fast(step.pos);
  const auto r_negs = score_negatives(step.negs, score_fast);
  const LossGrad lg = ranking_loss(cfg_.loss, r_pos, r_negs);

  Vector p_total = Vector::Zero(cfg_.d);
  Vector d_nl = Vector::Zero(cfg_.d);
  double d_w = 0.0;
  std::vector<std::pair<ItemId, Vector>> self_terms;
  auto add_item = [&](ItemId i, double d_i) {
    if (!ctx.empty()) {
      Vector s = full_sum;
      if (in_sorted(ctx, i)) s -= P_.col(i);
      out.at(1, i, cfg_.d) += d_i * c * s;
      const Vector vec = d_i * c * Q_.col(i);
      p_total += vec;
      if (in_sorted(ctx, i)) self_terms.emplace_back(i, vec);
    }
    out.at(3, i, cfg_.d) += d_i * w * nl;
    d_nl += d_i * w * M_.col(i);
    d_w += d_i * nl.dot(M_.col(i));
  };
  add_item(step.pos, lg.d_pos);
  for (std::size_t j = 0; j < step.negs.size(); ++j) {
    add_item(step.negs[j], lg.d_negs[j]);
  }
  for (const ItemId j : ctx) {
    Vector g = p_total;
    for (const auto& [item, vec] : self_terms) {
      if (item == j) g -= vec;
    }
    out.at(0, j, cfg_.d) += g;
  }
  out.at(2, step.last, cfg_.d) += d_nl;
  out.at(4, 0, 1)(0) += d_w;
  out.at(5, step.user, 1)(0) += d_w;
  return lg.loss;
}

Ranking FossilModel::rank(std::span<const ItemId> prefix,
                          std::size_t k) const {
  if (prefix.empty()) {
    throw std::invalid_argument("fossil: empty prefix");
  }
  auto known = known_prefix(prefix);
  Vector scores = Vector::Zero(static_cast<Eigen::Index>(n_items_));
  if (!known.empty()) {
    // sequential term; the personalized weight is zero for unseen sessions
    const ItemId last = known.back();
    scores += w_global_(0, 0) * (M_.transpose() * N_.col(last));
    std::sort(known.begin(), known.end());
    known.erase(std::unique(known.begin(), known.end()), known.end());
    const double c = std::pow(static_cast<double>(known.size()), -cfg_.alpha);
    Vector sum = Vector::Zero(cfg_.d);
    for (const ItemId j : known) sum += P_.col(j);
    scores += c * (Q_.transpose() * sum);
    for (const ItemId j : known) {
      scores[j] -= c * P_.col(j).dot(Q_.col(j));
    }
  }
  return rank_catalog(scores, k);
}

// ---------------------------------------------------------------------------
// SMF

void SmfModel::init_params(std::size_t n_items, std::size_t) {
  const auto ni = static_cast<Eigen::Index>(n_items);
  MST_.resize(cfg_.d, ni);
  Q_.resize(cfg_.d, ni);
  N_.resize(cfg_.d, ni);
  M_.resize(cfg_.d, ni);
  B1_.resize(1, ni);
  B2_.resize(1, ni);
  Wraw_.resize(1, ni);
  init_uniform(MST_, 0);
  init_uniform(Q_, 1);
  init_uniform(N_, 2);
  init_uniform(M_, 3);
  B1_.setZero();
  B2_.setZero();
  Wraw_.setZero();  // mixing weight starts at sigmoid(0) = 1/2
}

std::vector<ParamBlock> SmfModel::param_blocks() {
  return {{"M_st", &MST_}, {"Q", &Q_},   {"N", &N_},      {"M", &M_},
          {"b1", &B1_},    {"b2", &B2_}, {"w_raw", &Wraw_}};
}

FactorModelBase::TrainStep SmfModel::make_step(std::vector<ItemId> active,
                                               ItemId last, ItemId pos,
                                               std::vector<ItemId> negs) {
  TrainStep st;
  st.context = std::move(active);
  st.last = last;
  st.pos = pos;
  st.negs = std::move(negs);
  return st;
}

void SmfModel::make_steps(const Session& session, Eigen::Index,
                          std::vector<TrainStep>& out) {
  const auto& ev = session.events;
  std::vector<ItemId> prefix_items;
  for (std::size_t t = 0; t + 1 < ev.size(); ++t) {
    prefix_items.push_back(ev[t].item);
    ItemId target = ev[t + 1].item;
    if (cfg_.skip > 0.0 && rng_.next_double() < cfg_.skip &&
        t + 2 < ev.size()) {
      target = ev[t + 2].item;
    }
    std::vector<ItemId> distinct = prefix_items;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    std::vector<ItemId> active;
    active.reserve(distinct.size());
    for (const ItemId i : distinct) {
      if (cfg_.dropout > 0.0 && rng_.next_double() < cfg_.dropout) continue;
      active.push_back(i);
    }
    out.push_back(make_step(std::move(active), ev[t].item, target,
                            sample_negatives(target)));
  }
}

Vector SmfModel::embed_session(std::span<const ItemId> prefix) const {
  if (prefix.empty()) {
    throw std::invalid_argument("smf: empty prefix");
  }
  auto known = known_prefix(prefix);
  std::sort(known.begin(), known.end());
  known.erase(std::unique(known.begin(), known.end()), known.end());
  Vector s_e = Vector::Zero(cfg_.d);
  for (const ItemId i : known) s_e += MST_.col(i);
  return s_e;
}

double SmfModel::score_one(const Vector& s_e, ItemId last,
                           ItemId item) const {
  const double w = sigmoid(Wraw_(0, item));
  const double sess = s_e.dot(Q_.col(item)) + B1_(0, item);
  double seq = B2_(0, item);
  if (last >= 0) seq += N_.col(last).dot(M_.col(item));
  return w * sess + (1.0 - w) * seq;
}

double SmfModel::step_backward(const TrainStep& step, GradBatch& out) {
  Vector s_e = Vector::Zero(cfg_.d);
  for (const ItemId a : step.context) s_e += MST_.col(a);
  const Vector nl = N_.col(step.last);

  const double r_pos = score_one(s_e, step.last, step.pos);
  const auto r_negs = score_negatives(
      step.negs, [&](ItemId i) { return score_one(s_e, step.last, i); });
  const LossGrad lg = ranking_loss(cfg_.loss, r_pos, r_negs);

  Vector d_se = Vector::Zero(cfg_.d);
  Vector d_nl = Vector::Zero(cfg_.d);
  auto add_item = [&](ItemId i, double d_i) {
    const double w = sigmoid(Wraw_(0, i));
    const double sess = s_e.dot(Q_.col(i)) + B1_(0, i);
    const double seq = nl.dot(M_.col(i)) + B2_(0, i);
    out.at(6, i, 1)(0) += d_i * sigmoid_grad(w) * (sess - seq);
    out.at(1, i, cfg_.d) += d_i * w * s_e;
    out.at(4, i, 1)(0) += d_i * w;
    out.at(3, i, cfg_.d) += d_i * (1.0 - w) * nl;
    out.at(5, i, 1)(0) += d_i * (1.0 - w);
    d_nl += d_i * (1.0 - w) * M_.col(i);
    d_se += d_i * w * Q_.col(i);
  };
  add_item(step.pos, lg.d_pos);
  for (std::size_t j = 0; j < step.negs.size(); ++j) {
    add_item(step.negs[j], lg.d_negs[j]);
  }
  out.at(2, step.last, cfg_.d) += d_nl;
  for (const ItemId a : step.context) {
    out.at(0, a, cfg_.d) += d_se;
  }
  return lg.loss;
}

Ranking SmfModel::rank(std::span<const ItemId> prefix, std::size_t k) const {
  const Vector s_e = embed_session(prefix);
  const auto known = known_prefix(prefix);
  const ItemId last = known.empty() ? -1 : known.back();

  const Vector sess = (Q_.transpose() * s_e) + B1_.transpose();
  Vector seq = B2_.transpose();
  if (last >= 0) seq += M_.transpose() * N_.col(last);
  Vector scores(static_cast<Eigen::Index>(n_items_));
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double w = sigmoid(Wraw_(0, i));
    scores[i] = w * sess[i] + (1.0 - w) * seq[i];
  }
  return rank_catalog(scores, k);
}

}  // namespace sessrec
