// Copyright 2026 The negcf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "negcf/train.hpp"

namespace {

void apply_overrides(negcf::RunConfig& cfg, const CLI::App* cmd,
                     std::uint64_t seed, const std::string& out,
                     bool deterministic) {
  if (cmd->count("--seed") > 0) {
    cfg.split.seed = seed;
    cfg.model.init_seed = seed + 1;
    cfg.training.seed = seed + 2;
  }
  if (cmd->count("--out") > 0) {
    cfg.output.dir = out;
  }
  if (deterministic) {
    cfg.training.deterministic = true;
    cfg.training.workers = 1;
  }
}

void print_eval(const char* label, const negcf::EvalResult& ev) {
  std::printf("%s (%d users)\n", label, ev.users_evaluated);
  std::printf("  %-10s %12s\n", "metric", "value");
  for (const auto& [k, v] : ev.recall) {
    std::printf("  recall@%-3d %12.6f\n", k, v);
  }
  for (const auto& [k, v] : ev.ndcg) {
    std::printf("  ndcg@%-5d %12.6f\n", k, v);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "negcf: matrix-factorization training with selectable negative "
      "samplers, ranking evaluation, and hardness diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::string checkpoint;
  std::uint64_t seed = 0;
  bool deterministic = false;
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<double> ps;
  std::vector<int> ms;

  auto add_common = [&](CLI::App* cmd, bool with_det) {
    cmd->add_option("--config", config_path, "run config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed,
                    "base seed: split uses S, init S+1, training S+2");
    cmd->add_option("--out", out_override, "output directory override");
    if (with_det) {
      cmd->add_flag("--deterministic", deterministic,
                    "force sequential seeded training");
    }
  };

  CLI::App* train_cmd =
      app.add_subcommand("train", "train one model and write its run reports");
  add_common(train_cmd, true);

  CLI::App* eval_cmd = app.add_subcommand(
      "evaluate", "score a saved checkpoint on the config's test split");
  add_common(eval_cmd, false);
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "grid search over sampler hyperparameters (resumable)");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--alphas", alphas, "alpha grid values")
      ->delimiter(',');
  sweep_cmd->add_option("--betas", betas, "beta grid values")->delimiter(',');
  sweep_cmd->add_option("--ps", ps, "p grid values")->delimiter(',');
  sweep_cmd->add_option("--ms", ms, "candidate-count grid values")
      ->delimiter(',');

  CLI::App* diag_cmd = app.add_subcommand(
      "diagnose",
      "train the configured samplers on identical data and compare them");
  add_common(diag_cmd, true);

  CLI::App* gen_cmd = app.add_subcommand(
      "generate", "write the config's synthetic dataset as a csv file");
  gen_cmd->add_option("--config", config_path, "run config file")
      ->required()
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", out_override, "output csv path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      negcf::RunConfig cfg = negcf::load_config(config_path);
      apply_overrides(cfg, train_cmd, seed, out_override, deterministic);
      negcf::RunResult res = negcf::execute_train(cfg);
      print_eval("test metrics", res.final_test);
      if (res.final_val.has_value()) {
        print_eval("validation metrics", *res.final_val);
      }
      std::printf("outputs written to %s\n", cfg.output.dir.c_str());
    } else if (eval_cmd->parsed()) {
      negcf::RunConfig cfg = negcf::load_config(config_path);
      apply_overrides(cfg, eval_cmd, seed, out_override, false);
      negcf::EvalResult ev = negcf::execute_evaluate(cfg, checkpoint);
      print_eval("test metrics", ev);
    } else if (sweep_cmd->parsed()) {
      negcf::RunConfig cfg = negcf::load_config(config_path);
      apply_overrides(cfg, sweep_cmd, seed, out_override, deterministic);
      negcf::SweepGrid grid;
      grid.alphas = alphas;
      grid.betas = betas;
      grid.ps = ps;
      grid.ms = ms;
      std::vector<negcf::SweepCell> cells = negcf::execute_sweep(cfg, grid);
      const negcf::SweepCell* best = nullptr;
      int failed = 0;
      for (const negcf::SweepCell& c : cells) {
        if (!c.ok) {
          ++failed;
          continue;
        }
        if (best == nullptr || c.test.ndcg20 > best->test.ndcg20) {
          best = &c;
        }
      }
      std::printf("sweep finished: %zu cells, %d failed\n", cells.size(),
                  failed);
      if (best != nullptr) {
        std::printf(
            "best by ndcg@20: alpha=%s beta=%s p=%s m=%d ndcg@20=%.6f\n",
            negcf::double_repr(best->alpha).c_str(),
            negcf::double_repr(best->beta).c_str(),
            negcf::double_repr(best->p).c_str(), best->m, best->test.ndcg20);
      }
      std::printf("results in %s/sweep.csv\n", cfg.output.dir.c_str());
    } else if (diag_cmd->parsed()) {
      negcf::RunConfig cfg = negcf::load_config(config_path);
      apply_overrides(cfg, diag_cmd, seed, out_override, deterministic);
      std::vector<negcf::DiagnoseSamplerSummary> summaries =
          negcf::execute_diagnose(cfg);
      std::printf("%-28s %9s %9s %9s %10s %8s %9s\n", "sampler", "ndcg@20",
                  "fn_rate", "fpp@20", "hard_slope", "s/epoch", "recall@20");
      for (const auto& s : summaries) {
        char slope[32] = "n/a";
        if (s.hardness_slope.has_value()) {
          std::snprintf(slope, sizeof(slope), "%.6f", *s.hardness_slope);
        }
        std::printf("%-28s %9.4f %9.4f %9.4f %10s %8.3f %9.4f\n",
                    s.sampler.c_str(), s.final_metrics.ndcg20, s.mean_fn_rate,
                    s.final_fpp, slope, s.mean_seconds,
                    s.final_metrics.recall20);
      }
      std::printf("details in %s/summary.json\n", cfg.output.dir.c_str());
    } else if (gen_cmd->parsed()) {
      negcf::RunConfig cfg = negcf::load_config(config_path);
      negcf::execute_generate(cfg, out_override);
      std::printf("dataset written to %s\n", out_override.c_str());
    }
  } catch (const negcf::Error& e) {
    std::cerr << "negcf: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "negcf: unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
