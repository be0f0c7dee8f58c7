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
#include "sessrec/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "sessrec/checkpoint.hpp"
#include "sessrec/factorize.hpp"
#include "sessrec/gru.hpp"
#include "sessrec/registry.hpp"
#include "sessrec/rng.hpp"

namespace sessrec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t algo_seed(const ExperimentConfig& cfg, const std::string& name,
                        std::size_t slice_index) {
  return SeededRng(cfg.seed ^ fnv1a(name)).split(slice_index).seed();
}

TimeFormat time_format_from_string(const std::string& s) {
  if (s == "epoch_seconds") return TimeFormat::epoch_seconds;
  if (s == "epoch_millis") return TimeFormat::epoch_millis;
  if (s == "date") return TimeFormat::date;
  throw std::invalid_argument("unknown time_format: " + s);
}

SplitMode split_mode_from_string(const std::string& s) {
  if (s == "sliding_window") return SplitMode::sliding_window;
  if (s == "single") return SplitMode::single;
  if (s == "random") return SplitMode::random;
  throw std::invalid_argument("unknown split mode: " + s);
}

/// Splits without pruning (the cold-start sweep re-prunes per truncation).
std::vector<Slice> split_sessions(const ExperimentConfig& cfg,
                                  const std::vector<Session>& sessions) {
  switch (cfg.split.mode) {
    case SplitMode::sliding_window:
      return sliding_window_split(sessions, cfg.split);
    case SplitMode::single: {
      Slice s = single_split(sessions, cfg.split.test_days);
      return {std::move(s)};
    }
    case SplitMode::random: {
      Slice s = random_split(sessions, cfg.split.test_fraction, cfg.seed);
      return {std::move(s)};
    }
  }
  throw std::logic_error("split_sessions: bad mode");
}

struct MetricRef {
  enum Kind { hr, mrr, precision, recall, cov, pop } kind;
  std::size_t cutoff;
};

MetricRef parse_metric(const std::string& name) {
  const auto at = name.find('@');
  if (at == std::string::npos) {
    throw std::invalid_argument("metric must look like hr@20: " + name);
  }
  const std::string head = name.substr(0, at);
  MetricRef ref{};
  if (head == "hr") ref.kind = MetricRef::hr;
  else if (head == "mrr") ref.kind = MetricRef::mrr;
  else if (head == "precision" || head == "p") ref.kind = MetricRef::precision;
  else if (head == "recall" || head == "r") ref.kind = MetricRef::recall;
  else if (head == "cov") ref.kind = MetricRef::cov;
  else if (head == "pop") ref.kind = MetricRef::pop;
  else throw std::invalid_argument("unknown metric: " + name);
  ref.cutoff = std::stoul(name.substr(at + 1));
  return ref;
}

double metric_value(const EvalReport& rep, const MetricRef& ref) {
  for (std::size_t c = 0; c < rep.cutoffs.size(); ++c) {
    if (rep.cutoffs[c] == ref.cutoff) {
      const auto& row = rep.metrics[c];
      switch (ref.kind) {
        case MetricRef::hr: return row.hr;
        case MetricRef::mrr: return row.mrr;
        case MetricRef::precision: return row.precision;
        case MetricRef::recall: return row.recall;
        case MetricRef::cov: return row.cov;
        case MetricRef::pop: return row.pop;
      }
    }
  }
  throw std::invalid_argument("cutoff " + std::to_string(ref.cutoff) +
                              " not in the configured cutoffs");
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::string& base_dir) {
  ExperimentConfig cfg;
  if (j.contains("name")) cfg.name = j["name"].get<std::string>();
  const auto& ds = j.at("dataset");
  cfg.dataset_path = ds.at("path").get<std::string>();
  if (!cfg.dataset_path.empty() && cfg.dataset_path.front() != '/' &&
      !base_dir.empty()) {
    cfg.dataset_path = (fs::path(base_dir) / cfg.dataset_path).string();
  }
  if (ds.contains("columns")) {
    const auto& c = ds["columns"];
    if (c.contains("session")) {
      cfg.columns.session_col = c["session"].get<std::string>();
    }
    if (c.contains("item")) cfg.columns.item_col = c["item"].get<std::string>();
    if (c.contains("time")) cfg.columns.time_col = c["time"].get<std::string>();
    if (c.contains("delimiter")) {
      const auto d = c["delimiter"].get<std::string>();
      if (d.size() != 1) {
        throw std::invalid_argument("delimiter must be one character");
      }
      cfg.columns.delimiter = d[0];
    }
    if (c.contains("time_format")) {
      cfg.columns.time_format =
          time_format_from_string(c["time_format"].get<std::string>());
    }
  }
  if (j.contains("sessionization")) {
    const auto& s = j["sessionization"];
    if (s.contains("mode")) cfg.sessionize_mode = s["mode"].get<std::string>();
    if (s.contains("idle_gap_seconds")) {
      cfg.idle_gap_seconds = s["idle_gap_seconds"].get<std::int64_t>();
    }
  }
  if (j.contains("min_item_support")) {
    cfg.min_item_support = j["min_item_support"].get<std::int64_t>();
  }
  if (j.contains("min_session_length")) {
    cfg.min_session_length = j["min_session_length"].get<std::size_t>();
  }
  if (j.contains("split")) {
    const auto& s = j["split"];
    if (s.contains("mode")) {
      cfg.split.mode = split_mode_from_string(s["mode"].get<std::string>());
    }
    if (s.contains("n_slices")) cfg.split.n_slices = s["n_slices"].get<int>();
    if (s.contains("train_days")) {
      cfg.split.train_days = s["train_days"].get<double>();
    }
    if (s.contains("test_days")) {
      cfg.split.test_days = s["test_days"].get<double>();
    }
    if (s.contains("test_fraction")) {
      cfg.split.test_fraction = s["test_fraction"].get<double>();
    }
  }
  if (!j.contains("algorithms") || j["algorithms"].empty()) {
    throw std::invalid_argument("config: at least one algorithm is required");
  }
  for (const auto& a : j["algorithms"]) {
    AlgorithmSpec spec;
    spec.name = a.at("name").get<std::string>();
    if (a.contains("params")) spec.params = a["params"];
    cfg.algorithms.push_back(std::move(spec));
  }
  if (j.contains("cutoffs")) {
    cfg.cutoffs = j["cutoffs"].get<std::vector<std::size_t>>();
    if (!std::is_sorted(cfg.cutoffs.begin(), cfg.cutoffs.end()) ||
        cfg.cutoffs.empty()) {
      throw std::invalid_argument("config: cutoffs must be sorted ascending");
    }
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("output_dir")) {
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  in >> j;
  return parse_config(j, fs::path(path).parent_path().string());
}

std::vector<Session> prepare_sessions(const ExperimentConfig& cfg) {
  const auto records = load_events(cfg.dataset_path, cfg.columns);
  const auto log = intern_items(records);
  std::vector<Session> sessions;
  if (cfg.sessionize_mode == "keyed") {
    sessions = sessionize_keyed(log);
  } else if (cfg.sessionize_mode == "idle") {
    sessions = sessionize_idle(log, cfg.idle_gap_seconds);
  } else if (cfg.sessionize_mode == "day") {
    sessions = sessionize_by_day(log);
  } else {
    throw std::invalid_argument("unknown sessionization mode: " +
                                cfg.sessionize_mode);
  }
  sessions = filter_sessions(std::move(sessions), cfg.min_session_length);
  if (cfg.min_item_support > 1) {
    sessions = filter_min_item_support(std::move(sessions),
                                       cfg.min_item_support,
                                       cfg.min_session_length);
  }
  return sessions;
}

std::vector<Slice> prepare_slices(const ExperimentConfig& cfg,
                                  const std::vector<Session>& sessions) {
  auto slices = split_sessions(cfg, sessions);
  const bool time_based = cfg.split.mode != SplitMode::random;
  for (auto& slice : slices) {
    slice = prune_test(std::move(slice));
    validate_slice(slice, time_based);
  }
  return slices;
}

void write_slice_cache(const std::string& dir,
                       const std::vector<Slice>& slices) {
  fs::create_directories(dir);
  auto write_side = [&](const std::vector<Session>& sessions,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    std::vector<const Session*> ordered;
    ordered.reserve(sessions.size());
    for (const auto& s : sessions) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const Session* a, const Session* b) { return a->id < b->id; });
    for (const Session* s : ordered) {
      for (const auto& e : s->events) {
        out << s->id << '\t' << e.item << '\t' << e.time << '\n';
      }
    }
  };
  json manifest;
  manifest["n_slices"] = slices.size();
  for (const auto& slice : slices) {
    const std::string tag = "slice_" + std::to_string(slice.slice_index);
    write_side(slice.train, dir + "/" + tag + "_train.tsv");
    write_side(slice.test, dir + "/" + tag + "_test.tsv");
  }
  std::ofstream mf(dir + "/manifest.json");
  mf << manifest.dump(2) << '\n';
}

namespace {

std::vector<Session> read_cached_side(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read slice cache: " + path);
  std::vector<Session> sessions;
  std::string line;
  SessionId cur_id = -1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    SessionId sid;
    std::int64_t item, time;
    char tab1, tab2;
    if (!(ss >> sid >> std::noskipws >> tab1 >> std::skipws >> item >>
          std::noskipws >> tab2 >> std::skipws >> time) ||
        tab1 != '\t' || tab2 != '\t') {
      throw std::runtime_error("bad cache line " + std::to_string(line_no) +
                               " in " + path);
    }
    if (sessions.empty() || sid != cur_id) {
      Session s;
      s.id = sid;
      sessions.push_back(std::move(s));
      cur_id = sid;
    }
    Session& s = sessions.back();
    s.events.push_back(Event{static_cast<ItemId>(item), time,
                             static_cast<std::int32_t>(s.events.size() + 1)});
  }
  for (auto& s : sessions) {
    if (!s.events.empty()) s.start_time = s.events.front().time;
  }
  return sessions;
}

}  // namespace

std::vector<Slice> load_slice_cache(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw std::runtime_error("no manifest.json in " + dir);
  json manifest;
  mf >> manifest;
  const auto n = manifest.at("n_slices").get<std::size_t>();
  std::vector<Slice> slices(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string tag = "slice_" + std::to_string(i);
    slices[i].slice_index = static_cast<int>(i);
    slices[i].train = read_cached_side(dir + "/" + tag + "_train.tsv");
    slices[i].test = read_cached_side(dir + "/" + tag + "_test.tsv");
  }
  return slices;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg,
                                const std::vector<Slice>& slices,
                                const std::string& save_models_dir) {
  if (cfg.algorithms.empty()) {
    throw std::invalid_argument("run_experiment: no algorithms configured");
  }
  if (slices.empty()) {
    throw std::invalid_argument("run_experiment: no slices");
  }
  std::vector<PopularityTable> pops;
  pops.reserve(slices.size());
  for (const auto& slice : slices) {
    pops.emplace_back(slice.train);
  }

  ExperimentOutput out;
  for (const auto& algo : cfg.algorithms) {
    AlgoResult result;
    result.algorithm = algo.name;
    try {
      for (std::size_t si = 0; si < slices.size(); ++si) {
        auto model = make_recommender(algo.name, algo.params,
                                      algo_seed(cfg, algo.name, si));
        const auto t0 = std::chrono::steady_clock::now();
        model->fit(slices[si].train);
        const auto t1 = std::chrono::steady_clock::now();
        EvalReport rep = evaluate(*model, slices[si].test, cfg.cutoffs,
                                  pops[si], cfg.threads);
        rep.fit_seconds = std::chrono::duration<double>(t1 - t0).count();
        if (!save_models_dir.empty()) {
          std::vector<ParamBlock> blocks;
          std::uint64_t hash = 0;
          if (auto* fm = dynamic_cast<FactorModelBase*>(model.get())) {
            blocks = fm->param_blocks();
            hash = fm->config_hash();
          } else if (auto* g = dynamic_cast<GruRecommender*>(model.get())) {
            blocks = g->param_blocks();
            hash = g->config_hash();
          }
          if (!blocks.empty()) {
            fs::create_directories(save_models_dir);
            save_checkpoint(save_models_dir + "/" + algo.name + "_slice" +
                                std::to_string(slices[si].slice_index) +
                                ".ckpt",
                            hash, blocks);
          }
        }
        result.per_slice.push_back(std::move(rep));
      }
      result.aggregated = aggregate_slices(result.per_slice);
      result.ok = true;
    } catch (const std::exception& ex) {
      result.ok = false;
      result.error = ex.what();
      std::cerr << "algorithm '" << algo.name << "' failed: " << ex.what()
                << "\n";
    }
    out.results.push_back(std::move(result));
  }
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  const auto sessions = prepare_sessions(cfg);
  const auto slices = prepare_slices(cfg, sessions);
  return run_experiment(cfg, slices);
}

void write_result_files(const ExperimentConfig& cfg,
                        const ExperimentOutput& out,
                        const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<const AlgoResult*> ok;
  for (const auto& r : out.results) {
    if (r.ok) ok.push_back(&r);
  }
  const std::size_t k_max = cfg.cutoffs.back();
  auto mrr_at_kmax = [&](const AlgoResult* r) {
    return r->aggregated.metrics.back().mrr;
  };
  std::sort(ok.begin(), ok.end(), [&](const AlgoResult* a,
                                      const AlgoResult* b) {
    const double ma = mrr_at_kmax(a), mb = mrr_at_kmax(b);
    if (ma != mb) return ma > mb;
    return a->algorithm < b->algorithm;
  });

  for (std::size_t c = 0; c < cfg.cutoffs.size(); ++c) {
    const auto k = std::to_string(cfg.cutoffs[c]);
    std::ofstream f(out_dir + "/results_" + cfg.name + "_" + k + ".csv");
    f << "Algorithm;MRR@" << k << ";HR@" << k << ";COV@" << k << ";POP@" << k
      << ";P@" << k << ";R@" << k << "\n";
    for (const AlgoResult* r : ok) {
      const auto& row = r->aggregated.metrics[c];
      f << r->algorithm << ';' << fmt6(row.mrr) << ';' << fmt6(row.hr) << ';'
        << fmt6(row.cov) << ';' << fmt6(row.pop) << ';' << fmt6(row.precision)
        << ';' << fmt6(row.recall) << "\n";
    }
  }

  {
    std::ofstream f(out_dir + "/timing_" + cfg.name + ".csv");
    f << "Algorithm;FitSeconds;PredictMsMean;PredictMsMedian;MemoryMB\n";
    for (const AlgoResult* r : ok) {
      const auto& a = r->aggregated;
      f << r->algorithm << ';' << fmt6(a.fit_seconds) << ';'
        << fmt6(a.predict_ms_mean) << ';' << fmt6(a.predict_ms_median) << ';'
        << fmt6(static_cast<double>(a.memory_bytes) / (1024.0 * 1024.0))
        << "\n";
    }
  }

  {
    std::ofstream f(out_dir + "/significance_" + cfg.name + ".csv");
    f << "Metric;AlgorithmA;AlgorithmB;Statistic;PValue;Significant\n";
    if (ok.size() >= 2) {
      const AlgoResult* a = ok[0];
      const AlgoResult* b = ok[1];
      const auto sa = a->aggregated.per_session_mrr(k_max);
      const auto sb = b->aggregated.per_session_mrr(k_max);
      try {
        const auto w = wilcoxon_signed_rank(sa, sb);
        f << "mrr@" << k_max << ';' << a->algorithm << ';' << b->algorithm
          << ';' << fmt6(w.statistic) << ';' << fmt6(w.p_value) << ';'
          << (w.significant ? "yes" : "no") << "\n";
      } catch (const std::exception& ex) {
        f << "mrr@" << k_max << ';' << a->algorithm << ';' << b->algorithm
          << ";n/a;n/a;n/a\n";
      }
    }
  }

  bool any_failed = false;
  for (const auto& r : out.results) any_failed |= !r.ok;
  if (any_failed) {
    std::ofstream f(out_dir + "/errors_" + cfg.name + ".txt");
    for (const auto& r : out.results) {
      if (!r.ok) f << r.algorithm << ": " << r.error << "\n";
    }
  }
}

TuneSpec load_tune_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tune spec: " + path);
  json j;
  in >> j;
  TuneSpec spec;
  spec.algorithm = j.at("algorithm").get<std::string>();
  if (j.contains("space")) spec.space = j["space"];
  if (j.contains("iterations")) spec.iterations = j["iterations"].get<int>();
  if (j.contains("objective")) {
    spec.objective = j["objective"].get<std::string>();
  }
  return spec;
}

namespace {

bool all_finite_choices(const json& space) {
  for (const auto& [key, val] : space.items()) {
    if (!val.contains("choice")) return false;
  }
  return true;
}

json draw_params(const json& space, SeededRng& rng) {
  json out = json::object();
  for (const auto& [key, val] : space.items()) {
    if (val.contains("choice")) {
      const auto& choices = val["choice"];
      out[key] = choices[rng.next_below(choices.size())];
    } else if (val.contains("uniform")) {
      const double lo = val["uniform"][0].get<double>();
      const double hi = val["uniform"][1].get<double>();
      out[key] = rng.next_double(lo, hi);
    } else if (val.contains("log_uniform")) {
      const double lo = std::log(val["log_uniform"][0].get<double>());
      const double hi = std::log(val["log_uniform"][1].get<double>());
      out[key] = std::exp(rng.next_double(lo, hi));
    } else if (val.contains("int_uniform")) {
      const auto lo = val["int_uniform"][0].get<std::int64_t>();
      const auto hi = val["int_uniform"][1].get<std::int64_t>();
      out[key] = lo + static_cast<std::int64_t>(
                          rng.next_below(static_cast<std::uint64_t>(
                              hi - lo + 1)));
    } else {
      throw std::invalid_argument(
          "tune space entries need choice/uniform/log_uniform/int_uniform");
    }
  }
  return out;
}

json grid_point(const json& space, std::uint64_t index) {
  json out = json::object();
  for (const auto& [key, val] : space.items()) {
    const auto& choices = val["choice"];
    out[key] = choices[index % choices.size()];
    index /= choices.size();
  }
  return out;
}

std::uint64_t grid_size(const json& space) {
  std::uint64_t n = 1;
  for (const auto& [key, val] : space.items()) {
    n *= val["choice"].size();
    if (n > (1ULL << 32)) return 1ULL << 32;  // effectively unbounded
  }
  return n;
}

}  // namespace

TuneResult tune(const ExperimentConfig& cfg, const TuneSpec& spec) {
  if (spec.iterations < 1) {
    throw std::invalid_argument("tune: iterations must be >= 1");
  }
  const MetricRef objective = parse_metric(spec.objective);

  const auto sessions = prepare_sessions(cfg);
  auto slices = split_sessions(cfg, sessions);
  if (slices.empty()) throw std::runtime_error("tune: no slices");
  Slice validation =
      prune_test(make_validation_split(slices.front().train, cfg.split));
  validate_slice(validation, cfg.split.mode != SplitMode::random);
  const PopularityTable pop(validation.train);

  json base = json::object();
  for (const auto& a : cfg.algorithms) {
    if (a.name == spec.algorithm) base = a.params;
  }

  SeededRng rng = SeededRng(cfg.seed).split(fnv1a("tune"));
  std::vector<json> draws;
  if (all_finite_choices(spec.space) && !spec.space.empty()) {
    // finite grid: sample without replacement
    const std::uint64_t n = grid_size(spec.space);
    const auto take =
        std::min<std::uint64_t>(n, static_cast<std::uint64_t>(spec.iterations));
    std::vector<std::uint64_t> order(n);
    for (std::uint64_t i = 0; i < n; ++i) order[i] = i;
    for (std::uint64_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng.next_below(i)]);
    }
    for (std::uint64_t i = 0; i < take; ++i) {
      draws.push_back(grid_point(spec.space, order[i]));
    }
  } else {
    for (int i = 0; i < spec.iterations; ++i) {
      draws.push_back(draw_params(spec.space, rng));
    }
  }

  TuneResult result;
  result.best_objective = -1.0;
  const std::uint64_t model_seed = algo_seed(cfg, spec.algorithm, 0);
  bool any_ok = false;
  for (std::size_t trial = 0; trial < draws.size(); ++trial) {
    json merged = base;
    for (const auto& [key, val] : draws[trial].items()) merged[key] = val;
    json log_entry;
    log_entry["trial"] = trial;
    log_entry["params"] = merged;
    try {
      auto model = make_recommender(spec.algorithm, merged, model_seed);
      model->fit(validation.train);
      const EvalReport rep =
          evaluate(*model, validation.test, cfg.cutoffs, pop, cfg.threads);
      const double value = metric_value(rep, objective);
      log_entry["objective"] = value;
      if (value > result.best_objective || !any_ok) {
        if (!any_ok || value > result.best_objective) {
          result.best_objective = value;
          result.best_params = merged;
        }
      }
      any_ok = true;
    } catch (const std::exception& ex) {
      log_entry["error"] = ex.what();
    }
    result.trials.push_back(std::move(log_entry));
  }
  if (!any_ok) {
    throw std::runtime_error("tune: no trial succeeded");
  }
  return result;
}

void coldstart_sweep(const ExperimentConfig& cfg,
                     const std::vector<double>& keep_days,
                     const std::string& out_csv) {
  if (keep_days.empty()) {
    throw std::invalid_argument("coldstart_sweep: no keep_days levels");
  }
  const auto sessions = prepare_sessions(cfg);
  const auto raw_slices = split_sessions(cfg, sessions);
  const bool time_based = cfg.split.mode != SplitMode::random;

  fs::create_directories(fs::path(out_csv).parent_path().empty()
                             ? "."
                             : fs::path(out_csv).parent_path().string());
  std::ofstream f(out_csv);
  if (!f) throw std::runtime_error("cannot write " + out_csv);
  f << "Algorithm;KeepDays;Metric;Value\n";

  for (const double keep : keep_days) {
    std::vector<Slice> level;
    level.reserve(raw_slices.size());
    for (const auto& slice : raw_slices) {
      Slice s;
      s.slice_index = slice.slice_index;
      s.train = truncate_train(slice.train, keep);
      s.test = slice.test;
      s = prune_test(std::move(s));
      validate_slice(s, time_based);
      level.push_back(std::move(s));
    }
    const ExperimentOutput out = run_experiment(cfg, level);
    char keep_buf[32];
    std::snprintf(keep_buf, sizeof(keep_buf), "%g", keep);
    for (const auto& r : out.results) {
      if (!r.ok) continue;
      for (std::size_t c = 0; c < cfg.cutoffs.size(); ++c) {
        const auto k = std::to_string(cfg.cutoffs[c]);
        const auto& row = r.aggregated.metrics[c];
        f << r.algorithm << ';' << keep_buf << ";hr@" << k << ';'
          << fmt6(row.hr) << "\n";
        f << r.algorithm << ';' << keep_buf << ";mrr@" << k << ';'
          << fmt6(row.mrr) << "\n";
        f << r.algorithm << ';' << keep_buf << ";precision@" << k << ';'
          << fmt6(row.precision) << "\n";
        f << r.algorithm << ';' << keep_buf << ";recall@" << k << ';'
          << fmt6(row.recall) << "\n";
        f << r.algorithm << ';' << keep_buf << ";cov@" << k << ';'
          << fmt6(row.cov) << "\n";
        f << r.algorithm << ';' << keep_buf << ";pop@" << k << ';'
          << fmt6(row.pop) << "\n";
      }
    }
  }
}

std::string format_report_table(const std::string& results_csv_path) {
  std::ifstream in(results_csv_path);
  if (!in) {
    throw std::runtime_error("cannot open result file: " + results_csv_path);
  }
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const auto next = line.find(';', pos);
      if (next == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, next - pos));
      pos = next + 1;
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw std::runtime_error("empty result file");
  // re-sort data rows by the MRR column (index 1), descending
  std::sort(rows.begin() + 1, rows.end(),
            [](const auto& a, const auto& b) {
              const double ma = std::stod(a[1]), mb = std::stod(b[1]);
              if (ma != mb) return ma > mb;
              return a[0] < b[0];
            });
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], r[c].size());
    }
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      out << r[c];
      if (c + 1 < r.size()) {
        out << std::string(width[c] - r[c].size() + 2, ' ');
      }
    }
    out << '\n';
  }
  return out.str();
}

std::vector<Session> synth_sessions(std::size_t n_sessions,
                                    std::size_t n_items, double days,
                                    std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<Session> sessions;
  sessions.reserve(n_sessions);
  const double span = days * static_cast<double>(kSecondsPerDay);
  for (std::size_t i = 0; i < n_sessions; ++i) {
    Session s;
    s.id = static_cast<SessionId>(i);
    const auto start = static_cast<std::int64_t>(
        span * static_cast<double>(i) / static_cast<double>(n_sessions));
    const std::size_t len = 2 + rng.next_below(5);
    ItemId prev = -1;
    for (std::size_t j = 0; j < len; ++j) {
      ItemId item;
      if (prev >= 0 && rng.next_double() < 0.5) {
        // sequential pattern: a frequent successor
        item = static_cast<ItemId>((prev + 1) % static_cast<ItemId>(n_items));
      } else {
        // popularity-skewed pick
        const double u = rng.next_double();
        item = static_cast<ItemId>(static_cast<double>(n_items) * u * u);
        if (static_cast<std::size_t>(item) >= n_items) {
          item = static_cast<ItemId>(n_items - 1);
        }
      }
      s.events.push_back(Event{item, start + static_cast<std::int64_t>(j) * 30,
                               static_cast<std::int32_t>(j + 1)});
      prev = item;
    }
    s.start_time = s.events.front().time;
    sessions.push_back(std::move(s));
  }
  return sessions;
}

void write_dataset_csv(const std::string& path,
                       const std::vector<Session>& sessions) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "SessionId,ItemId,Time\n";
  for (const auto& s : sessions) {
    for (const auto& e : s.events) {
      out << s.id << ',' << e.item << ',' << e.time << '\n';
    }
  }
}

}  // namespace sessrec
