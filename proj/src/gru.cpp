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
#include "sessrec/gru.hpp"

#include <algorithm>
#include <deque>
#include <iostream>
#include <stdexcept>

#include "sessrec/math.hpp"

namespace sessrec {

void validate(const GruConfig& cfg) {
  if (cfg.hidden < 1) {
    throw std::invalid_argument("gru config: hidden must be >= 1");
  }
  if (cfg.batch < 1) {
    throw std::invalid_argument("gru config: batch must be >= 1");
  }
  if (cfg.epochs < 0) {
    throw std::invalid_argument("gru config: epochs must be >= 0");
  }
  if (cfg.lr <= 0.0) {
    throw std::invalid_argument("gru config: lr must be positive");
  }
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) {
    throw std::invalid_argument("gru config: dropout must be in [0, 1)");
  }
}

Vector gru_step(const GruParams& p, const Vector& h, ItemId x) {
  const Vector z =
      (p.Wz.col(x) + p.Uz * h).unaryExpr([](double v) { return sigmoid(v); });
  const Vector r =
      (p.Wr.col(x) + p.Ur * h).unaryExpr([](double v) { return sigmoid(v); });
  const Vector hbar =
      (p.Wh.col(x) + p.Uh * r.cwiseProduct(h)).array().tanh();
  return (Vector::Ones(h.size()) - z).cwiseProduct(h) + z.cwiseProduct(hbar);
}

std::vector<BatchStep> session_parallel_batches(
    const std::vector<Session>& sessions, std::size_t batch_size) {
  if (batch_size == 0) {
    throw std::invalid_argument("session_parallel_batches: batch_size == 0");
  }
  std::deque<std::uint32_t> queue;
  for (std::uint32_t i = 0; i < sessions.size(); ++i) {
    if (sessions[i].size() >= 2) queue.push_back(i);
  }

  struct Lane {
    std::uint32_t session = 0;
    std::size_t cursor = 0;  // index of the next input event
    bool fresh = true;       // hidden state must be reset before next step
    bool active = false;
  };
  std::vector<Lane> lanes(std::min(batch_size, queue.size()));
  for (auto& lane : lanes) {
    lane.session = queue.front();
    queue.pop_front();
    lane.active = true;
  }

  std::vector<BatchStep> steps;
  while (true) {
    BatchStep step;
    for (std::uint32_t li = 0; li < lanes.size(); ++li) {
      Lane& lane = lanes[li];
      if (!lane.active) continue;
      const auto& ev = sessions[lane.session].events;
      step.inputs.push_back(ev[lane.cursor].item);
      step.targets.push_back(ev[lane.cursor + 1].item);
      step.reset.push_back(lane.fresh ? 1 : 0);
      step.lanes.push_back(li);
      step.sessions.push_back(lane.session);
      lane.fresh = false;
      ++lane.cursor;
      if (lane.cursor + 1 >= ev.size()) {
        if (queue.empty()) {
          lane.active = false;  // retire: the effective batch shrinks
        } else {
          lane.session = queue.front();
          queue.pop_front();
          lane.cursor = 0;
          lane.fresh = true;
        }
      }
    }
    if (step.inputs.empty()) break;
    steps.push_back(std::move(step));
  }
  return steps;
}

std::vector<ParamBlock> GruRecommender::param_blocks() {
  return {{"Wz", &params_.Wz}, {"Wr", &params_.Wr}, {"Wh", &params_.Wh},
          {"Uz", &params_.Uz}, {"Ur", &params_.Ur}, {"Uh", &params_.Uh},
          {"O", &params_.O},   {"b", &params_.b}};
}

std::uint64_t GruRecommender::config_hash() const {
  const std::string canon =
      "gru4rec|hidden=" + std::to_string(cfg_.hidden) +
      "|batch=" + std::to_string(cfg_.batch) +
      "|epochs=" + std::to_string(cfg_.epochs) +
      "|loss=" + to_string(cfg_.loss) + "|lr=" + std::to_string(cfg_.lr) +
      "|dropout=" + std::to_string(cfg_.dropout) +
      "|init=" + std::to_string(cfg_.init_scale) +
      "|seed=" + std::to_string(cfg_.seed);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : canon) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void GruRecommender::prepare(const std::vector<Session>& train) {
  if (train.empty()) {
    throw std::invalid_argument("gru4rec: empty training set");
  }
  ItemId max_id = -1;
  for (const auto& s : train) {
    for (const auto& e : s.events) max_id = std::max(max_id, e.item);
  }
  n_items_ = static_cast<std::size_t>(max_id + 1);
  popularity_.assign(n_items_, 0);
  for (const auto& s : train) {
    for (const auto& e : s.events) ++popularity_[e.item];
  }
  catalog_.clear();
  for (std::size_t i = 0; i < n_items_; ++i) {
    if (popularity_[i] > 0) catalog_.push_back(static_cast<ItemId>(i));
  }
  if (catalog_.size() < 2) {
    throw TrainingError("gru4rec: catalog too small");
  }

  const auto ni = static_cast<Eigen::Index>(n_items_);
  const auto hi = static_cast<Eigen::Index>(cfg_.hidden);
  auto init = [&](Matrix& m, Eigen::Index rows, Eigen::Index cols,
                  std::uint64_t stream) {
    m.resize(rows, cols);
    SeededRng r = rng_.split(stream + 2000);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index row = 0; row < rows; ++row) {
        m(row, c) = r.next_double(-cfg_.init_scale, cfg_.init_scale);
      }
    }
  };
  init(params_.Wz, hi, ni, 0);
  init(params_.Wr, hi, ni, 1);
  init(params_.Wh, hi, ni, 2);
  init(params_.Uz, hi, hi, 3);
  init(params_.Ur, hi, hi, 4);
  init(params_.Uh, hi, hi, 5);
  init(params_.O, hi, ni, 6);
  params_.b.resize(1, ni);
  params_.b.setZero();
}

double GruRecommender::step_backward(const StepExample& ex, GradBatch& out,
                                     Vector* h_out) const {
  const auto& p = params_;
  const Vector az = p.Wz.col(ex.input) + p.Uz * ex.h_prev;
  const Vector ar = p.Wr.col(ex.input) + p.Ur * ex.h_prev;
  const Vector z = az.unaryExpr([](double v) { return sigmoid(v); });
  const Vector r = ar.unaryExpr([](double v) { return sigmoid(v); });
  const Vector rh = r.cwiseProduct(ex.h_prev);
  const Vector hbar = (p.Wh.col(ex.input) + p.Uh * rh).array().tanh();
  const Vector h_new =
      (Vector::Ones(z.size()) - z).cwiseProduct(ex.h_prev) +
      z.cwiseProduct(hbar);
  if (h_out != nullptr) *h_out = h_new;

  // inverted dropout on the hidden-to-output connection
  Vector h_vis = h_new;
  if (!ex.keep.empty()) {
    const double scale = 1.0 / (1.0 - cfg_.dropout);
    for (Eigen::Index i = 0; i < h_vis.size(); ++i) {
      h_vis[i] = ex.keep[static_cast<std::size_t>(i)] ? h_vis[i] * scale : 0.0;
    }
  }

  const double r_pos = p.O.col(ex.pos).dot(h_vis) + p.b(0, ex.pos);
  std::vector<double> r_negs(ex.negs.size());
  for (std::size_t j = 0; j < ex.negs.size(); ++j) {
    r_negs[j] = p.O.col(ex.negs[j]).dot(h_vis) + p.b(0, ex.negs[j]);
  }
  const LossGrad lg = ranking_loss(cfg_.loss, r_pos, r_negs);

  const auto hi = static_cast<Eigen::Index>(cfg_.hidden);
  Vector d_hvis = lg.d_pos * p.O.col(ex.pos);
  out.at(6, ex.pos, hi) += lg.d_pos * h_vis;
  out.at(7, ex.pos, 1)(0) += lg.d_pos;
  for (std::size_t j = 0; j < ex.negs.size(); ++j) {
    d_hvis += lg.d_negs[j] * p.O.col(ex.negs[j]);
    out.at(6, ex.negs[j], hi) += lg.d_negs[j] * h_vis;
    out.at(7, ex.negs[j], 1)(0) += lg.d_negs[j];
  }

  Vector d_h = d_hvis;
  if (!ex.keep.empty()) {
    const double scale = 1.0 / (1.0 - cfg_.dropout);
    for (Eigen::Index i = 0; i < d_h.size(); ++i) {
      d_h[i] = ex.keep[static_cast<std::size_t>(i)] ? d_h[i] * scale : 0.0;
    }
  }

  // cell backward, h_prev detached
  const Vector d_z = d_h.cwiseProduct(hbar - ex.h_prev);
  const Vector d_hbar = d_h.cwiseProduct(z);
  const Vector d_ah =
      d_hbar.cwiseProduct(Vector::Ones(hi) - hbar.cwiseProduct(hbar));
  const Vector d_r = (p.Uh.transpose() * d_ah).cwiseProduct(ex.h_prev);
  const Vector d_az = d_z.cwiseProduct(z.cwiseProduct(Vector::Ones(hi) - z));
  const Vector d_ar = d_r.cwiseProduct(r.cwiseProduct(Vector::Ones(hi) - r));

  out.at(0, ex.input, hi) += d_az;  // Wz
  out.at(1, ex.input, hi) += d_ar;  // Wr
  out.at(2, ex.input, hi) += d_ah;  // Wh
  for (Eigen::Index c = 0; c < hi; ++c) {
    if (ex.h_prev[c] != 0.0) {
      out.at(3, c, hi) += d_az * ex.h_prev[c];  // Uz
      out.at(4, c, hi) += d_ar * ex.h_prev[c];  // Ur
    }
    if (rh[c] != 0.0) {
      out.at(5, c, hi) += d_ah * rh[c];  // Uh
    }
  }
  return lg.loss;
}

double GruRecommender::step_loss(const StepExample& ex) const {
  GradBatch scratch;
  return step_backward(ex, scratch);
}

void GruRecommender::fit(const std::vector<Session>& train) {
  prepare(train);
  run_epochs(train, cfg_.epochs);
}

void GruRecommender::run_epochs(const std::vector<Session>& train,
                                int epochs) {
  auto blocks = param_blocks();
  Adagrad opt(cfg_.lr, 1e-6, blocks);
  const auto hi = static_cast<Eigen::Index>(cfg_.hidden);
  GradBatch batch;
  epoch_losses_.clear();
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    const auto steps =
        session_parallel_batches(train, static_cast<std::size_t>(cfg_.batch));
    Matrix hidden = Matrix::Zero(hi, static_cast<Eigen::Index>(cfg_.batch));
    for (const auto& step : steps) {
      batch.clear();
      for (std::size_t e = 0; e < step.inputs.size(); ++e) {
        const std::uint32_t lane = step.lanes[e];
        if (step.reset[e]) hidden.col(lane).setZero();

        StepExample ex;
        ex.h_prev = hidden.col(lane);
        ex.input = step.inputs[e];
        ex.pos = step.targets[e];
        // in-batch negatives: the other lanes' targets
        for (std::size_t o = 0; o < step.targets.size(); ++o) {
          if (o != e && step.targets[o] != ex.pos) {
            ex.negs.push_back(step.targets[o]);
          }
        }
        if (ex.negs.empty()) {
          // degenerate batch (single lane or identical targets): fall back
          // to one uniform sample
          ItemId n;
          do {
            n = catalog_[rng_.next_below(catalog_.size())];
          } while (n == ex.pos);
          ex.negs.push_back(n);
        }
        if (cfg_.dropout > 0.0) {
          ex.keep.resize(static_cast<std::size_t>(hi));
          for (auto& kbit : ex.keep) {
            kbit = rng_.next_double() >= cfg_.dropout ? 1 : 0;
          }
        }
        Vector h_new;
        loss_sum += step_backward(ex, batch, &h_new);
        ++loss_count;
        hidden.col(lane) = h_new;  // carried forward detached
      }
      opt.apply(blocks, batch);
    }
    epoch_losses_.push_back(
        loss_count == 0 ? 0.0 : loss_sum / static_cast<double>(loss_count));
    for (const auto& b : blocks) {
      if (!b.mat->allFinite()) {
        throw TrainingError("gru4rec: non-finite parameters in '" + b.name +
                            "' after epoch " + std::to_string(epoch + 1));
      }
    }
  }
}

Vector GruRecommender::output_scores(const Vector& h) const {
  return (params_.O.transpose() * h) + params_.b.transpose();
}

Ranking GruRecommender::rank(std::span<const ItemId> prefix,
                             std::size_t k) const {
  if (prefix.empty()) {
    throw std::invalid_argument("gru4rec: empty prefix");
  }
  Vector h = Vector::Zero(cfg_.hidden);
  for (const ItemId item : prefix) {
    if (item < 0 || static_cast<std::size_t>(item) >= n_items_ ||
        popularity_[item] == 0) {
      std::cerr << "gru4rec: skipping unknown item " << item
                << " in prefix\n";
      continue;
    }
    h = gru_step(params_, h, item);
  }
  const Vector scores = output_scores(h);
  std::vector<Scored> flat;
  flat.reserve(catalog_.size());
  for (const ItemId item : catalog_) flat.push_back({item, scores[item]});
  return top_k_ranking(std::move(flat), k, popularity_);
}

std::size_t GruRecommender::memory_bytes() const {
  std::size_t bytes = popularity_.capacity() * sizeof(std::int64_t) +
                      catalog_.capacity() * sizeof(ItemId);
  for (const auto& b : const_cast<GruRecommender*>(this)->param_blocks()) {
    bytes += static_cast<std::size_t>(b.mat->size()) * sizeof(double);
  }
  return bytes;
}

}  // namespace sessrec
