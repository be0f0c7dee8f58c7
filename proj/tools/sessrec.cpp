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
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sessrec/harness.hpp"

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  int threads = 0;
};

sessrec::ExperimentConfig load_with_overrides(const GlobalOpts& g) {
  auto cfg = sessrec::load_config(g.config_path);
  if (g.seed >= 0) cfg.seed = static_cast<std::uint64_t>(g.seed);
  if (g.threads > 0) cfg.threads = g.threads;
  if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"session-based recommendation benchmark"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "override the config seed");
  app.add_option("--threads", g.threads, "evaluation worker threads");
  app.add_option("--out", g.out_dir, "output directory override");

  auto* prepare = app.add_subcommand(
      "prepare", "sessionize, split and cache the slices");
  prepare->add_option("--config", g.config_path, "experiment config json")
      ->required();

  std::string prepared_dir, save_models_dir;
  auto* run = app.add_subcommand("run", "run the configured experiment");
  run->add_option("--config", g.config_path, "experiment config json")
      ->required();
  run->add_option("--prepared", prepared_dir,
                  "use a slice cache written by 'prepare'");
  run->add_option("--save-models", save_models_dir,
                  "write model checkpoints to this directory");

  std::string tune_spec_path;
  auto* tune_cmd = app.add_subcommand("tune", "randomized parameter search");
  tune_cmd->add_option("--config", g.config_path, "experiment config json")
      ->required();
  tune_cmd->add_option("--spec", tune_spec_path, "tune spec json")
      ->required();

  std::vector<double> keep_days;
  auto* coldstart = app.add_subcommand(
      "coldstart", "sweep over truncated training windows");
  coldstart->add_option("--config", g.config_path, "experiment config json")
      ->required();
  coldstart->add_option("--days", keep_days, "keep_days levels")
      ->required()
      ->delimiter(',');

  std::vector<std::string> report_files;
  auto* report = app.add_subcommand("report", "format result tables");
  report->add_option("files", report_files, "results_*.csv files")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prepare) {
      const auto cfg = load_with_overrides(g);
      const auto sessions = sessrec::prepare_sessions(cfg);
      const auto slices = sessrec::prepare_slices(cfg, sessions);
      sessrec::write_slice_cache(cfg.output_dir, slices);
      std::cout << "cached " << slices.size() << " slices to "
                << cfg.output_dir << "\n";
    } else if (*run) {
      const auto cfg = load_with_overrides(g);
      sessrec::ExperimentOutput out;
      if (!prepared_dir.empty()) {
        const auto slices = sessrec::load_slice_cache(prepared_dir);
        out = sessrec::run_experiment(cfg, slices, save_models_dir);
      } else {
        const auto sessions = sessrec::prepare_sessions(cfg);
        const auto slices = sessrec::prepare_slices(cfg, sessions);
        out = sessrec::run_experiment(cfg, slices, save_models_dir);
      }
      sessrec::write_result_files(cfg, out, cfg.output_dir);
      for (const auto& r : out.results) {
        if (r.ok) {
          std::cout << r.algorithm << ": ok\n";
        } else {
          std::cout << r.algorithm << ": FAILED (" << r.error << ")\n";
        }
      }
      std::cout << "results written to " << cfg.output_dir << "\n";
    } else if (*tune_cmd) {
      const auto cfg = load_with_overrides(g);
      const auto spec = sessrec::load_tune_spec(tune_spec_path);
      const auto result = sessrec::tune(cfg, spec);
      std::filesystem::create_directories(cfg.output_dir);
      const std::string log_path =
          cfg.output_dir + "/tune_" + spec.algorithm + ".ndjson";
      std::ofstream log(log_path);
      for (const auto& t : result.trials) log << t.dump() << "\n";
      std::cout << "best " << spec.objective << " = " << result.best_objective
                << "\n"
                << "params: " << result.best_params.dump() << "\n"
                << "trial log: " << log_path << "\n";
    } else if (*coldstart) {
      const auto cfg = load_with_overrides(g);
      const std::string out_csv =
          cfg.output_dir + "/coldstart_" + cfg.name + ".csv";
      std::filesystem::create_directories(cfg.output_dir);
      sessrec::coldstart_sweep(cfg, keep_days, out_csv);
      std::cout << "sweep written to " << out_csv << "\n";
    } else if (*report) {
      for (const auto& f : report_files) {
        std::cout << sessrec::format_report_table(f) << "\n";
      }
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
