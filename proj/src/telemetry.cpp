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

#include "negcf/telemetry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "negcf/eval.hpp"

namespace negcf {

const char* const kReportCsvHeader =
    "epoch,mean_loss,hard_mean,hard_median,hard_p10,hard_p90,"
    "hard_defined_frac,fn_rate,recall20,ndcg20,ndcg50,seconds";

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) {
    throw ContractError("quantile of empty sample");
  }
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

SelectionAccumulator::SelectionAccumulator(
    const std::vector<std::vector<ItemId>>* test_positives,
    bool track_selected_items)
    : test_positives_(test_positives),
      track_selected_items_(track_selected_items) {
  if (track_selected_items_ && test_positives_ != nullptr) {
    selected_by_user_.resize(test_positives_->size());
  }
}

void SelectionAccumulator::record_selection(UserId u, ItemId /*pos*/,
                                            const SampledNegative& neg) {
  ++total_;
  if (neg.hardness_at_selection.has_value()) {
    hardness_samples_.push_back(*neg.hardness_at_selection);
  }
  if (test_positives_ != nullptr &&
      u < static_cast<UserId>(test_positives_->size()) &&
      contains_item((*test_positives_)[u], neg.item)) {
    ++false_negatives_;
  }
  if (track_selected_items_) {
    if (u >= static_cast<UserId>(selected_by_user_.size())) {
      selected_by_user_.resize(static_cast<std::size_t>(u) + 1);
    }
    selected_by_user_[u].insert(neg.item);
  }
}

void SelectionAccumulator::merge(const SelectionAccumulator& other) {
  total_ += other.total_;
  false_negatives_ += other.false_negatives_;
  hardness_samples_.insert(hardness_samples_.end(),
                           other.hardness_samples_.begin(),
                           other.hardness_samples_.end());
  if (track_selected_items_) {
    if (other.selected_by_user_.size() > selected_by_user_.size()) {
      selected_by_user_.resize(other.selected_by_user_.size());
    }
    for (std::size_t u = 0; u < other.selected_by_user_.size(); ++u) {
      selected_by_user_[u].insert(other.selected_by_user_[u].begin(),
                                  other.selected_by_user_[u].end());
    }
  }
}

EpochTelemetry SelectionAccumulator::finalize_epoch(
    int epoch, int batches, std::optional<double> mean_loss,
    std::optional<RankingMetrics> metrics, double seconds) {
  EpochTelemetry t;
  t.epoch = epoch;
  t.batches = batches;
  t.mean_loss = mean_loss;
  t.metrics = metrics;
  t.seconds = seconds;

  if (total_ > 0) {
    t.defined_hardness_fraction =
        static_cast<double>(hardness_samples_.size()) /
        static_cast<double>(total_);
    t.false_negative_rate =
        static_cast<double>(false_negatives_) / static_cast<double>(total_);
  }
  if (!hardness_samples_.empty()) {
    std::sort(hardness_samples_.begin(), hardness_samples_.end());
    HardnessStats hs;
    hs.mean = std::accumulate(hardness_samples_.begin(),
                              hardness_samples_.end(), 0.0) /
              static_cast<double>(hardness_samples_.size());
    hs.median = quantile_sorted(hardness_samples_, 0.5);
    hs.p10 = quantile_sorted(hardness_samples_, 0.1);
    hs.p90 = quantile_sorted(hardness_samples_, 0.9);
    t.hardness = hs;
  }

  hardness_samples_.clear();
  total_ = 0;
  false_negatives_ = 0;
  for (auto& s : selected_by_user_) s.clear();
  return t;
}

double fpp_rate(const EmbeddingModel& model, const InteractionDataset& train,
                const std::vector<std::unordered_set<ItemId>>& selected_by_user,
                int k) {
  if (k < 1) throw ContractError("fpp_rate requires k >= 1");
  double sum = 0.0;
  std::int64_t users = 0;
  for (UserId u = 0; u < train.num_users; ++u) {
    if (train.user_positives[u].empty()) continue;
    RankingResult ranking = rank_items(model, u, train.user_positives[u]);
    const std::size_t top =
        std::min<std::size_t>(static_cast<std::size_t>(k),
                              ranking.ranked_items.size());
    if (top == 0) continue;
    std::int64_t never_selected = 0;
    const bool has_selections =
        u < static_cast<UserId>(selected_by_user.size());
    for (std::size_t r = 0; r < top; ++r) {
      const ItemId item = ranking.ranked_items[r];
      if (!has_selections || selected_by_user[u].count(item) == 0) {
        ++never_selected;
      }
    }
    sum += static_cast<double>(never_selected) / static_cast<double>(top);
    ++users;
  }
  if (users == 0) {
    throw ContractError("fpp_rate: no users with train positives");
  }
  return sum / static_cast<double>(users);
}

double trend_slope(std::span<const double> series, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw ContractError("window_fraction must be in (0, 1]");
  }
  const std::size_t n = series.size();
  std::size_t window = static_cast<std::size_t>(
      std::ceil(window_fraction * static_cast<double>(n)));
  window = std::min(window, n);
  if (window < 2) {
    throw ContractError("trend window has fewer than 2 points");
  }
  const std::size_t start = n - window;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    const double x = static_cast<double>(i);
    sx += x;
    sy += series[i];
    sxx += x * x;
    sxy += x * series[i];
  }
  const double nw = static_cast<double>(window);
  const double denom = nw * sxx - sx * sx;
  return (nw * sxy - sx * sy) / denom;
}

namespace {

std::string csv_cell(const std::optional<double>& v) {
  return v.has_value() ? double_repr(*v) : std::string();
}

nlohmann::json to_json(const EpochTelemetry& t) {
  nlohmann::json j;
  j["epoch"] = t.epoch;
  j["batches"] = t.batches;
  j["mean_loss"] =
      t.mean_loss.has_value() ? nlohmann::json(*t.mean_loss) : nullptr;
  if (t.hardness.has_value()) {
    j["hard_mean"] = t.hardness->mean;
    j["hard_median"] = t.hardness->median;
    j["hard_p10"] = t.hardness->p10;
    j["hard_p90"] = t.hardness->p90;
  } else {
    j["hard_mean"] = nullptr;
    j["hard_median"] = nullptr;
    j["hard_p10"] = nullptr;
    j["hard_p90"] = nullptr;
  }
  j["hard_defined_frac"] = t.defined_hardness_fraction;
  j["fn_rate"] = t.false_negative_rate;
  if (t.metrics.has_value()) {
    j["recall20"] = t.metrics->recall20;
    j["ndcg20"] = t.metrics->ndcg20;
    j["ndcg50"] = t.metrics->ndcg50;
  } else {
    j["recall20"] = nullptr;
    j["ndcg20"] = nullptr;
    j["ndcg50"] = nullptr;
  }
  j["seconds"] = t.seconds;
  return j;
}

EpochTelemetry from_json(const nlohmann::json& j) {
  EpochTelemetry t;
  t.epoch = j.at("epoch").get<int>();
  t.batches = j.at("batches").get<int>();
  if (!j.at("mean_loss").is_null()) {
    t.mean_loss = j.at("mean_loss").get<double>();
  }
  if (!j.at("hard_mean").is_null()) {
    HardnessStats hs;
    hs.mean = j.at("hard_mean").get<double>();
    hs.median = j.at("hard_median").get<double>();
    hs.p10 = j.at("hard_p10").get<double>();
    hs.p90 = j.at("hard_p90").get<double>();
    t.hardness = hs;
  }
  t.defined_hardness_fraction = j.at("hard_defined_frac").get<double>();
  t.false_negative_rate = j.at("fn_rate").get<double>();
  if (!j.at("recall20").is_null()) {
    RankingMetrics m;
    m.recall20 = j.at("recall20").get<double>();
    m.ndcg20 = j.at("ndcg20").get<double>();
    m.ndcg50 = j.at("ndcg50").get<double>();
    t.metrics = m;
  }
  t.seconds = j.at("seconds").get<double>();
  return t;
}

}  // namespace

void emit_run_report(std::span<const EpochTelemetry> epochs,
                     const std::filesystem::path& path, ReportFormat format,
                     const RunReportHeader* header) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write report: " + path.string());
  }
  if (format == ReportFormat::kCsv) {
    out << kReportCsvHeader << "\n";
    for (const auto& t : epochs) {
      out << t.epoch << ',' << csv_cell(t.mean_loss) << ','
          << (t.hardness ? double_repr(t.hardness->mean) : "") << ','
          << (t.hardness ? double_repr(t.hardness->median) : "") << ','
          << (t.hardness ? double_repr(t.hardness->p10) : "") << ','
          << (t.hardness ? double_repr(t.hardness->p90) : "") << ','
          << double_repr(t.defined_hardness_fraction) << ','
          << double_repr(t.false_negative_rate) << ','
          << (t.metrics ? double_repr(t.metrics->recall20) : "") << ','
          << (t.metrics ? double_repr(t.metrics->ndcg20) : "") << ','
          << (t.metrics ? double_repr(t.metrics->ndcg50) : "") << ','
          << double_repr(t.seconds) << "\n";
    }
  } else {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    if (header != nullptr) {
      doc["config_hash"] = header->config_hash;
      doc["seed"] = header->seed;
      doc["tool_version"] = header->tool_version;
      doc["sampler"] = header->sampler;
    }
    doc["epochs"] = nlohmann::json::array();
    for (const auto& t : epochs) {
      doc["epochs"].push_back(to_json(t));
    }
    out << doc.dump(2) << "\n";
  }
  if (!out) {
    throw IoError("error while writing report: " + path.string());
  }
}

std::vector<EpochTelemetry> load_report_json(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open report: " + path.string());
  }
  nlohmann::json doc = nlohmann::json::parse(in);
  std::vector<EpochTelemetry> epochs;
  for (const auto& j : doc.at("epochs")) {
    epochs.push_back(from_json(j));
  }
  return epochs;
}

std::vector<EpochTelemetry> load_report_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open report: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != kReportCsvHeader) {
    throw ParseError("report csv header mismatch in " + path.string());
  }

  auto parse_opt = [](const std::string& cell) -> std::optional<double> {
    if (cell.empty()) return std::nullopt;
    double v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw ParseError("bad report cell '" + cell + "'");
    }
    return v;
  };

  std::vector<EpochTelemetry> epochs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (cells.size() != 12) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 12 report columns, got " +
                       std::to_string(cells.size()));
    }
    EpochTelemetry t;
    t.epoch = static_cast<int>(*parse_opt(cells[0]));
    t.mean_loss = parse_opt(cells[1]);
    auto hm = parse_opt(cells[2]);
    if (hm.has_value()) {
      HardnessStats hs;
      hs.mean = *hm;
      hs.median = *parse_opt(cells[3]);
      hs.p10 = *parse_opt(cells[4]);
      hs.p90 = *parse_opt(cells[5]);
      t.hardness = hs;
    }
    t.defined_hardness_fraction = *parse_opt(cells[6]);
    t.false_negative_rate = *parse_opt(cells[7]);
    auto r20 = parse_opt(cells[8]);
    if (r20.has_value()) {
      RankingMetrics m;
      m.recall20 = *r20;
      m.ndcg20 = *parse_opt(cells[9]);
      m.ndcg50 = *parse_opt(cells[10]);
      t.metrics = m;
    }
    t.seconds = *parse_opt(cells[11]);
    epochs.push_back(t);
  }
  return epochs;
}

}  // namespace negcf
