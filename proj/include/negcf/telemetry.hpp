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
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "negcf/core.hpp"
#include "negcf/data.hpp"
#include "negcf/model.hpp"
#include "negcf/samplers.hpp"

namespace negcf {

struct HardnessStats {
  double mean = 0.0;
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;

  friend bool operator==(const HardnessStats&, const HardnessStats&) = default;
};

struct RankingMetrics {
  double recall20 = 0.0;
  double ndcg20 = 0.0;
  double ndcg50 = 0.0;

  friend bool operator==(const RankingMetrics&, const RankingMetrics&) = default;
};

// One row of the per-epoch report. Hardness stats are absent when no
// selection in the epoch had a defined hardness; metrics are absent on
// epochs without an evaluation pass. seconds covers training only
// (evaluation excluded) and is zeroed in deterministic runs so reports stay
// byte-reproducible; measured timings then live in the timing sidecar.
struct EpochTelemetry {
  int epoch = 0;
  int batches = 0;
  std::optional<double> mean_loss;
  std::optional<HardnessStats> hardness;
  double defined_hardness_fraction = 0.0;
  double false_negative_rate = 0.0;
  std::optional<RankingMetrics> metrics;
  double seconds = 0.0;

  friend bool operator==(const EpochTelemetry&, const EpochTelemetry&) = default;
};

// Linear-interpolation quantile of an ascending-sorted sample.
double quantile_sorted(std::span<const double> sorted, double q);

// Streaming per-epoch accumulator. Holds a borrowed pointer to per-user test
// positives for the false-negative flag; optionally tracks which items each
// user saw as negatives (for the false-positive diagnostic).
class SelectionAccumulator {
 public:
  explicit SelectionAccumulator(
      const std::vector<std::vector<ItemId>>* test_positives,
      bool track_selected_items = false);

  void record_selection(UserId u, ItemId pos, const SampledNegative& neg);

  // Computes the epoch row and resets the accumulator for the next epoch.
  EpochTelemetry finalize_epoch(int epoch, int batches,
                                std::optional<double> mean_loss,
                                std::optional<RankingMetrics> metrics,
                                double seconds);

  std::int64_t total_selections() const { return total_; }
  const std::vector<std::unordered_set<ItemId>>& selected_by_user() const {
    return selected_by_user_;
  }
  const std::vector<std::vector<ItemId>>* test_positives() const {
    return test_positives_;
  }
  bool tracking_selected() const { return track_selected_items_; }

  // Deterministic merge of a worker-local accumulator (fixed call order).
  void merge(const SelectionAccumulator& other);

 private:
  const std::vector<std::vector<ItemId>>* test_positives_;
  bool track_selected_items_;
  std::vector<double> hardness_samples_;
  std::int64_t total_ = 0;
  std::int64_t false_negatives_ = 0;
  std::vector<std::unordered_set<ItemId>> selected_by_user_;
};

// Fraction of each user's top-k recommendations that were never selected as
// a negative for that user during the epoch, averaged over users with a
// non-empty candidate list. High under easy-negative sampling: confidently
// ranked non-interacted items go un-updated yet still get recommended.
double fpp_rate(const EmbeddingModel& model, const InteractionDataset& train,
                const std::vector<std::unordered_set<ItemId>>& selected_by_user,
                int k = 20);

// OLS slope over the trailing window_fraction of the series (x = epoch
// position). Throws when the window holds fewer than two points.
double trend_slope(std::span<const double> series, double window_fraction);

enum class ReportFormat { kCsv, kJson };

struct RunReportHeader {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string sampler;
};

// CSV schema (stable):
// epoch,mean_loss,hard_mean,hard_median,hard_p10,hard_p90,hard_defined_frac,
// fn_rate,recall20,ndcg20,ndcg50,seconds
// Absent values serialize as empty cells (CSV) or null (JSON).
void emit_run_report(std::span<const EpochTelemetry> epochs,
                     const std::filesystem::path& path, ReportFormat format,
                     const RunReportHeader* header = nullptr);

std::vector<EpochTelemetry> load_report_csv(const std::filesystem::path& path);
std::vector<EpochTelemetry> load_report_json(const std::filesystem::path& path);

extern const char* const kReportCsvHeader;

}  // namespace negcf
