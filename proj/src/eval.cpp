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
#include "sessrec/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <unordered_set>

namespace sessrec {

PopularityTable::PopularityTable(const std::vector<Session>& train) {
  ItemId max_id = -1;
  for (const auto& s : train) {
    for (const auto& e : s.events) max_id = std::max(max_id, e.item);
  }
  counts_.assign(static_cast<std::size_t>(max_id + 1), 0);
  for (const auto& s : train) {
    for (const auto& e : s.events) ++counts_[e.item];
  }
  std::int64_t lo = 0, hi = 0;
  bool first = true;
  for (const auto c : counts_) {
    if (c == 0) continue;
    ++n_catalog_;
    if (first) {
      lo = hi = c;
      first = false;
    } else {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
  }
  normalized_.assign(counts_.size(), 0.0);
  if (hi > lo) {
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (counts_[i] > 0) {
        normalized_[i] = static_cast<double>(counts_[i] - lo) /
                         static_cast<double>(hi - lo);
      }
    }
  }
  // all counts equal: every score stays 0
}

namespace {

std::vector<StepOutcome> eval_session(const Recommender& model,
                                      const Session& session,
                                      std::uint32_t session_index,
                                      std::size_t k_max) {
  const auto& ev = session.events;
  std::vector<ItemId> prefix;
  prefix.reserve(ev.size());
  std::vector<StepOutcome> out;
  out.reserve(ev.size() - 1);
  for (std::size_t n = 0; n + 1 < ev.size(); ++n) {
    prefix.push_back(ev[n].item);
    const ItemId target = ev[n + 1].item;
    const Ranking ranking = model.rank(prefix, k_max);

    StepOutcome rec;
    rec.session_index = session_index;
    rec.step = static_cast<std::uint32_t>(n + 1);
    rec.top_items.reserve(ranking.size());
    for (std::size_t r = 0; r < ranking.size(); ++r) {
      rec.top_items.push_back(ranking[r].item);
      if (ranking[r].item == target) {
        rec.target_rank = static_cast<int>(r + 1);
      }
    }
    std::unordered_set<ItemId> rest;
    for (std::size_t j = n + 1; j < ev.size(); ++j) rest.insert(ev[j].item);
    rec.remaining.assign(rest.begin(), rest.end());
    std::sort(rec.remaining.begin(), rec.remaining.end());
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::vector<StepOutcome> next_item_eval(const Recommender& model,
                                        const std::vector<Session>& test,
                                        std::size_t k_max) {
  std::vector<StepOutcome> out;
  for (std::uint32_t s = 0; s < test.size(); ++s) {
    auto recs = eval_session(model, test[s], s, k_max);
    out.insert(out.end(), std::make_move_iterator(recs.begin()),
               std::make_move_iterator(recs.end()));
  }
  return out;
}

HrMrr hr_mrr(std::span<const StepOutcome> records, std::size_t k) {
  if (records.empty()) {
    throw std::invalid_argument("hr_mrr: no records");
  }
  double hits = 0.0, rr = 0.0;
  for (const auto& r : records) {
    if (r.target_rank > 0 && static_cast<std::size_t>(r.target_rank) <= k) {
      hits += 1.0;
      rr += 1.0 / static_cast<double>(r.target_rank);
    }
  }
  const auto n = static_cast<double>(records.size());
  return {hits / n, rr / n};
}

PrecRec remaining_items_pr(std::span<const StepOutcome> records,
                           std::size_t k) {
  if (records.empty() || k == 0) return {};
  double p_sum = 0.0, r_sum = 0.0;
  for (const auto& r : records) {
    std::size_t hits = 0;
    const std::size_t take = std::min(k, r.top_items.size());
    for (std::size_t i = 0; i < take; ++i) {
      if (std::binary_search(r.remaining.begin(), r.remaining.end(),
                             r.top_items[i])) {
        ++hits;
      }
    }
    p_sum += static_cast<double>(hits) / static_cast<double>(k);
    if (!r.remaining.empty()) {
      r_sum += static_cast<double>(hits) /
               static_cast<double>(r.remaining.size());
    }
  }
  const auto n = static_cast<double>(records.size());
  return {p_sum / n, r_sum / n};
}

PrecRec remaining_items_eval(const Recommender& model,
                             const std::vector<Session>& test,
                             std::size_t k) {
  const auto records = next_item_eval(model, test, k);
  return remaining_items_pr(records, k);
}

double coverage(std::span<const StepOutcome> records, std::size_t k,
                std::size_t catalog_size) {
  if (catalog_size == 0) return 0.0;
  std::unordered_set<ItemId> seen;
  for (const auto& r : records) {
    const std::size_t take = std::min(k, r.top_items.size());
    for (std::size_t i = 0; i < take; ++i) seen.insert(r.top_items[i]);
  }
  return static_cast<double>(seen.size()) /
         static_cast<double>(catalog_size);
}

double popularity_bias(std::span<const StepOutcome> records, std::size_t k,
                       const PopularityTable& pop) {
  double sum = 0.0;
  std::size_t slots = 0;
  for (const auto& r : records) {
    const std::size_t take = std::min(k, r.top_items.size());
    for (std::size_t i = 0; i < take; ++i) {
      sum += pop.score(r.top_items[i]);
      ++slots;
    }
  }
  return slots == 0 ? 0.0 : sum / static_cast<double>(slots);
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Exact null distribution of W+ over random signs, tied ranks included.
// Ranks are doubled so averaged ranks stay integral.
double exact_two_sided_p(const std::vector<double>& ranks, double w_min) {
  std::int64_t total2 = 0;
  std::vector<std::int64_t> r2(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    r2[i] = static_cast<std::int64_t>(std::llround(ranks[i] * 2.0));
    total2 += r2[i];
  }
  std::vector<double> ways(static_cast<std::size_t>(total2 + 1), 0.0);
  ways[0] = 1.0;
  for (const auto r : r2) {
    for (std::int64_t s = total2 - r; s >= 0; --s) {
      if (ways[static_cast<std::size_t>(s)] != 0.0) {
        ways[static_cast<std::size_t>(s + r)] +=
            ways[static_cast<std::size_t>(s)];
      }
    }
  }
  const double denom = std::ldexp(1.0, static_cast<int>(ranks.size()));
  const auto w2 = static_cast<std::int64_t>(std::llround(w_min * 2.0));
  double below = 0.0;
  for (std::int64_t s = 0; s <= std::min(w2, total2); ++s) {
    below += ways[static_cast<std::size_t>(s)];
  }
  return std::min(1.0, 2.0 * below / denom);
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a,
                                    std::span<const double> b, double alpha) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("wilcoxon: length mismatch");
  }
  std::vector<double> diffs;
  diffs.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  const std::size_t n = diffs.size();
  if (n < 6) {
    throw std::invalid_argument(
        "wilcoxon: fewer than 6 non-zero differences (" + std::to_string(n) +
        ")");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(diffs[x]) < std::abs(diffs[y]);
  });
  std::vector<double> ranks(n, 0.0);
  double tie_correction = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n &&
           std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) {
      ++j;
    }
    const double avg_rank = (static_cast<double>(i + 1 + j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg_rank;
    const auto ties = static_cast<double>(j - i);
    tie_correction += ties * ties * ties - ties;
    i = j;
  }
  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diffs[i] > 0.0) w_plus += ranks[i];
  }
  const double total = static_cast<double>(n) * (n + 1) / 2.0;
  const double w_min = std::min(w_plus, total - w_plus);

  WilcoxonResult res;
  res.statistic = w_min;
  res.n = n;
  if (n <= 25) {
    res.p_value = exact_two_sided_p(ranks, w_min);
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var =
        nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_correction / 48.0;
    const double z = (w_min - mean + 0.5) / std::sqrt(var);
    res.p_value = std::min(1.0, 2.0 * normal_cdf(z));
  }
  res.significant = res.p_value < alpha;
  return res;
}

std::vector<double> EvalReport::per_session_mrr(std::size_t k) const {
  std::vector<double> out;
  out.reserve(session_ranks.size());
  for (const auto& ranks : session_ranks) {
    if (ranks.empty()) continue;
    double rr = 0.0;
    for (const int r : ranks) {
      if (r > 0 && static_cast<std::size_t>(r) <= k) {
        rr += 1.0 / static_cast<double>(r);
      }
    }
    out.push_back(rr / static_cast<double>(ranks.size()));
  }
  return out;
}

namespace {

struct Accumulator {
  struct PerCutoff {
    double hits = 0.0, rr = 0.0, prec = 0.0, rec = 0.0, pop = 0.0;
    std::size_t pop_slots = 0;
    std::unordered_set<ItemId> covered;
  };
  std::vector<PerCutoff> per_cutoff;
  std::size_t n_steps = 0;
  std::vector<double> latencies_ms;

  explicit Accumulator(std::size_t n_cutoffs) : per_cutoff(n_cutoffs) {}

  void merge(Accumulator&& other) {
    for (std::size_t c = 0; c < per_cutoff.size(); ++c) {
      auto& dst = per_cutoff[c];
      auto& src = other.per_cutoff[c];
      dst.hits += src.hits;
      dst.rr += src.rr;
      dst.prec += src.prec;
      dst.rec += src.rec;
      dst.pop += src.pop;
      dst.pop_slots += src.pop_slots;
      dst.covered.merge(src.covered);
    }
    n_steps += other.n_steps;
    latencies_ms.insert(latencies_ms.end(), other.latencies_ms.begin(),
                        other.latencies_ms.end());
  }
};

void eval_one_session(const Recommender& model, const Session& session,
                      std::span<const std::size_t> cutoffs,
                      const PopularityTable& pop, Accumulator& acc,
                      std::vector<int>& ranks_out) {
  const auto& ev = session.events;
  const std::size_t k_max = cutoffs.back();
  std::vector<ItemId> prefix;
  prefix.reserve(ev.size());
  std::vector<ItemId> remaining_sorted;
  for (std::size_t n = 0; n + 1 < ev.size(); ++n) {
    prefix.push_back(ev[n].item);
    const ItemId target = ev[n + 1].item;

    const auto t0 = std::chrono::steady_clock::now();
    const Ranking ranking = model.rank(prefix, k_max);
    const auto t1 = std::chrono::steady_clock::now();
    acc.latencies_ms.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());

    int target_rank = 0;
    for (std::size_t r = 0; r < ranking.size(); ++r) {
      if (ranking[r].item == target) {
        target_rank = static_cast<int>(r + 1);
        break;
      }
    }
    ranks_out.push_back(target_rank);

    std::unordered_set<ItemId> rest;
    for (std::size_t j = n + 1; j < ev.size(); ++j) rest.insert(ev[j].item);

    ++acc.n_steps;
    for (std::size_t c = 0; c < cutoffs.size(); ++c) {
      const std::size_t k = cutoffs[c];
      auto& slot = acc.per_cutoff[c];
      if (target_rank > 0 && static_cast<std::size_t>(target_rank) <= k) {
        slot.hits += 1.0;
        slot.rr += 1.0 / static_cast<double>(target_rank);
      }
      const std::size_t take = std::min(k, ranking.size());
      std::size_t pr_hits = 0;
      for (std::size_t i = 0; i < take; ++i) {
        const ItemId item = ranking[i].item;
        if (rest.contains(item)) ++pr_hits;
        slot.covered.insert(item);
        slot.pop += pop.score(item);
        ++slot.pop_slots;
      }
      slot.prec += static_cast<double>(pr_hits) / static_cast<double>(k);
      slot.rec +=
          static_cast<double>(pr_hits) / static_cast<double>(rest.size());
    }
  }
}

}  // namespace

EvalReport evaluate(const Recommender& model,
                    const std::vector<Session>& test,
                    std::span<const std::size_t> cutoffs,
                    const PopularityTable& pop, int threads) {
  if (cutoffs.empty() || !std::is_sorted(cutoffs.begin(), cutoffs.end())) {
    throw std::invalid_argument("evaluate: cutoffs must be sorted ascending");
  }
  EvalReport report;
  report.cutoffs.assign(cutoffs.begin(), cutoffs.end());
  report.session_ranks.resize(test.size());

  Accumulator total(cutoffs.size());
  const int n_workers =
      std::max(1, std::min<int>(threads, static_cast<int>(test.size())));
  if (n_workers == 1) {
    for (std::size_t s = 0; s < test.size(); ++s) {
      eval_one_session(model, test[s], cutoffs, pop, total,
                       report.session_ranks[s]);
    }
  } else {
    std::vector<Accumulator> parts(n_workers, Accumulator(cutoffs.size()));
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t s = w; s < test.size();
             s += static_cast<std::size_t>(n_workers)) {
          eval_one_session(model, test[s], cutoffs, pop, parts[w],
                           report.session_ranks[s]);
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& p : parts) total.merge(std::move(p));
  }

  report.n_steps = total.n_steps;
  report.metrics.resize(cutoffs.size());
  const double n = std::max<double>(1.0, static_cast<double>(total.n_steps));
  for (std::size_t c = 0; c < cutoffs.size(); ++c) {
    const auto& slot = total.per_cutoff[c];
    auto& row = report.metrics[c];
    row.hr = slot.hits / n;
    row.mrr = slot.rr / n;
    row.precision = slot.prec / n;
    row.recall = slot.rec / n;
    row.cov = pop.catalog_size() == 0
                  ? 0.0
                  : static_cast<double>(slot.covered.size()) /
                        static_cast<double>(pop.catalog_size());
    row.pop = slot.pop_slots == 0
                  ? 0.0
                  : slot.pop / static_cast<double>(slot.pop_slots);
  }
  if (!total.latencies_ms.empty()) {
    auto& lat = total.latencies_ms;
    double sum = 0.0;
    for (const double v : lat) sum += v;
    report.predict_ms_mean = sum / static_cast<double>(lat.size());
    std::nth_element(lat.begin(), lat.begin() + lat.size() / 2, lat.end());
    report.predict_ms_median = lat[lat.size() / 2];
  }
  report.memory_bytes = model.memory_bytes();
  return report;
}

EvalReport aggregate_slices(std::span<const EvalReport> reports) {
  if (reports.empty()) {
    throw std::invalid_argument("aggregate_slices: no reports");
  }
  EvalReport out;
  out.cutoffs = reports.front().cutoffs;
  out.metrics.resize(out.cutoffs.size());
  const double n = static_cast<double>(reports.size());
  for (const auto& rep : reports) {
    if (rep.cutoffs != out.cutoffs) {
      throw std::invalid_argument("aggregate_slices: cutoff mismatch");
    }
    for (std::size_t c = 0; c < out.cutoffs.size(); ++c) {
      out.metrics[c].hr += rep.metrics[c].hr / n;
      out.metrics[c].mrr += rep.metrics[c].mrr / n;
      out.metrics[c].precision += rep.metrics[c].precision / n;
      out.metrics[c].recall += rep.metrics[c].recall / n;
      out.metrics[c].cov += rep.metrics[c].cov / n;
      out.metrics[c].pop += rep.metrics[c].pop / n;
    }
    out.n_steps += rep.n_steps;
    out.fit_seconds += rep.fit_seconds / n;
    out.predict_ms_mean += rep.predict_ms_mean / n;
    out.predict_ms_median += rep.predict_ms_median / n;
    out.memory_bytes += rep.memory_bytes / reports.size();
    out.session_ranks.insert(out.session_ranks.end(),
                             rep.session_ranks.begin(),
                             rep.session_ranks.end());
  }
  return out;
}

}  // namespace sessrec
