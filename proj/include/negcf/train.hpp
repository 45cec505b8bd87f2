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

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "negcf/config.hpp"
#include "negcf/data.hpp"
#include "negcf/eval.hpp"
#include "negcf/model.hpp"
#include "negcf/samplers.hpp"
#include "negcf/telemetry.hpp"

namespace negcf {

inline constexpr const char* kToolVersion = "0.1.0";

// The parsed (or synthesized) dataset plus its split, ready for the epoch
// loop. train keeps the full dataset's user/item bounds so every item stays
// a valid negative candidate.
struct PreparedData {
  InteractionDataset full;
  SplitManifest manifest;
  InteractionDataset train;
  std::vector<std::vector<ItemId>> val_positives;
  std::vector<std::vector<ItemId>> test_positives;
};

PreparedData prepare_data(const RunConfig& config);

struct EpochStats {
  int batches = 0;
  double mean_loss = 0.0;
  double seconds = 0.0;  // wall clock for the epoch, evaluation excluded
};

// One pass over the training interactions in a seeded shuffle order.
// Gradients are averaged within each mini-batch, then applied with Adam.
// deterministic (or workers == 1) runs strictly sequentially; otherwise
// batches are partitioned across workers with unsynchronized row updates,
// which is permitted to be nondeterministic.
EpochStats train_epoch(EmbeddingModel& model, const InteractionDataset& train,
                       const Sampler& sampler, const AdamParams& hp,
                       AdamState& user_state, AdamState& item_state,
                       int batch_size, bool deterministic, int workers,
                       std::uint64_t train_seed, int epoch_index,
                       SelectionAccumulator& acc);

struct RunOptions {
  // Track per-user selected negatives and compute the top-20
  // never-pushed-down fraction each epoch (costs one ranking pass).
  bool track_selected = false;
  std::optional<int> eval_every_override;
};

struct RunResult {
  std::vector<EpochTelemetry> report;  // seconds zeroed in deterministic mode
  std::vector<double> epoch_seconds;   // measured, one per epoch
  std::vector<double> fpp_series;      // filled when track_selected
  EvalResult final_test;
  std::optional<EvalResult> final_val;
  EmbeddingModel model;
};

RunResult run_training(const RunConfig& config, const PreparedData& data,
                       const RunOptions& options = {});

// Command bodies shared by the CLI and the test suite. Each writes its
// artifacts under config.output.dir.
//
// train: config.ini, manifest.txt, checkpoint.bin, report.csv, report.json,
// timing.csv (measured wall clock, exempt from byte-reproducibility),
// metrics.json.
RunResult execute_train(const RunConfig& config);

// Re-derives the split from the config and scores a saved checkpoint.
EvalResult execute_evaluate(const RunConfig& config,
                            const std::filesystem::path& checkpoint);

// Writes the synthetic dataset the config describes as a loadable csv.
void execute_generate(const RunConfig& config,
                      const std::filesystem::path& out_path);

struct DiagnoseSamplerSummary {
  std::string sampler;
  RankingMetrics final_metrics;
  std::optional<double> hardness_slope;  // trailing-window slope of hard_mean
  double mean_fn_rate = 0.0;
  double mean_seconds = 0.0;
  double final_fpp = 0.0;
};

// Trains every configured sampler on identical data, seeds, and init;
// evaluates every epoch. Per-sampler subdirectories get the standard run
// reports plus fpp.csv; summary.json holds the comparison.
std::vector<DiagnoseSamplerSummary> execute_diagnose(const RunConfig& config);

// Axes default to the base config's value when a list is empty.
struct SweepGrid {
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<double> ps;
  std::vector<int> ms;
};

struct SweepCell {
  double alpha = 0.0;
  double beta = 0.0;
  double p = 0.0;
  int m = 0;
  bool ok = false;
  std::string error;
  RankingMetrics test;
  RankingMetrics val;
};

// Runs the grid as independent train runs in per-cell subdirectories.
// Cells whose metrics.json already exists are loaded instead of re-run, so
// an interrupted sweep resumes; failed cells are recorded and skipped over.
// Consolidated results land in sweep.csv.
std::vector<SweepCell> execute_sweep(const RunConfig& base,
                                     const SweepGrid& grid);

}  // namespace negcf
