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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "negcf/telemetry.hpp"

using namespace negcf;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("negcf_telemetry_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

SampledNegative make_neg(ItemId item, double score,
                         std::optional<double> hard) {
  SampledNegative n;
  n.item = item;
  n.score_at_selection = score;
  n.hardness_at_selection = hard;
  n.candidate_count_used = 1;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

EpochTelemetry sample_row(int epoch) {
  EpochTelemetry t;
  t.epoch = epoch;
  t.batches = 7;
  t.mean_loss = 0.6931 + epoch * 0.001;
  HardnessStats h;
  h.mean = 0.25;
  h.median = 0.2;
  h.p10 = 0.05;
  h.p90 = 0.6;
  t.hardness = h;
  t.defined_hardness_fraction = 0.875;
  t.false_negative_rate = 0.0125;
  RankingMetrics m;
  m.recall20 = 0.11;
  m.ndcg20 = 0.07;
  m.ndcg50 = 0.09;
  t.metrics = m;
  t.seconds = 0.0;
  return t;
}

}  // namespace

TEST_CASE("sorted-sample quantiles interpolate linearly") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(quantile_sorted(v, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(quantile_sorted(v, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(quantile_sorted(v, 0.5) == doctest::Approx(2.5).epsilon(1e-12));
  // index = q*(n-1) = 0.3 -> 1 + 0.3*(2-1)
  CHECK(quantile_sorted(v, 0.1) == doctest::Approx(1.3).epsilon(1e-12));
  const std::vector<double> one{5.0};
  CHECK(quantile_sorted(one, 0.9) == doctest::Approx(5.0).epsilon(1e-12));

  SUBCASE("matches a rank-walk oracle on random samples") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> unif(0, 1);
    for (int inst = 0; inst < 100; ++inst) {
      const int n = 2 + static_cast<int>(rng() % 50);
      std::vector<double> s(static_cast<std::size_t>(n));
      for (auto& x : s) x = unif(rng);
      std::sort(s.begin(), s.end());
      const double q = unif(rng);
      const double idx = q * (n - 1);
      const auto lo = static_cast<std::size_t>(std::floor(idx));
      const auto hi = static_cast<std::size_t>(std::ceil(idx));
      const double frac = idx - std::floor(idx);
      const double expect = s[lo] + frac * (s[hi] - s[lo]);
      CHECK(quantile_sorted(s, q) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("epoch accumulator aggregates hardness and flags leakage") {
  // User 0 holds item 5 in its test set: selecting it is a false negative.
  std::vector<std::vector<ItemId>> test_pos{{5}, {}};
  SelectionAccumulator acc(&test_pos, true);

  acc.record_selection(0, 1, make_neg(2, 0.5, 0.25));
  acc.record_selection(0, 1, make_neg(5, 0.9, 0.75));  // false negative
  acc.record_selection(1, 3, make_neg(4, -0.1, std::nullopt));
  acc.record_selection(1, 3, make_neg(6, 0.1, 0.5));

  CHECK(acc.total_selections() == 4);
  CHECK(acc.selected_by_user()[0].count(2) == 1);
  CHECK(acc.selected_by_user()[0].count(5) == 1);
  CHECK(acc.selected_by_user()[1].count(6) == 1);

  EpochTelemetry t = acc.finalize_epoch(3, 2, 0.7, std::nullopt, 1.25);
  CHECK(t.epoch == 3);
  CHECK(t.batches == 2);
  CHECK(t.mean_loss == doctest::Approx(0.7));
  CHECK(t.false_negative_rate == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(t.defined_hardness_fraction == doctest::Approx(0.75).epsilon(1e-12));
  REQUIRE(t.hardness.has_value());
  CHECK(t.hardness->mean == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.hardness->median == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.seconds == doctest::Approx(1.25));
  CHECK_FALSE(t.metrics.has_value());

  SUBCASE("finalize resets state, including tracked selections") {
    CHECK(acc.total_selections() == 0);
    for (const auto& s : acc.selected_by_user()) CHECK(s.empty());
    EpochTelemetry empty = acc.finalize_epoch(4, 0, std::nullopt, std::nullopt,
                                              0.0);
    CHECK_FALSE(empty.hardness.has_value());
    CHECK(empty.defined_hardness_fraction == 0.0);
    CHECK(empty.false_negative_rate == 0.0);
  }
}

TEST_CASE("worker accumulators merge into the same totals") {
  std::vector<std::vector<ItemId>> test_pos{{1}, {2}};
  SelectionAccumulator main(&test_pos, true);
  SelectionAccumulator w0(&test_pos, true);
  SelectionAccumulator w1(&test_pos, true);

  w0.record_selection(0, 0, make_neg(1, 0.4, 0.8));  // false negative
  w0.record_selection(0, 0, make_neg(3, 0.2, 0.4));
  w1.record_selection(1, 0, make_neg(4, 0.3, std::nullopt));

  main.merge(w0);
  main.merge(w1);
  CHECK(main.total_selections() == 3);
  CHECK(main.selected_by_user()[0].size() == 2);
  CHECK(main.selected_by_user()[1].size() == 1);
  EpochTelemetry t = main.finalize_epoch(0, 1, std::nullopt, std::nullopt, 0.0);
  CHECK(t.false_negative_rate == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(t.defined_hardness_fraction ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  REQUIRE(t.hardness.has_value());
  CHECK(t.hardness->mean == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("unseen-in-top-k rate counts never-selected recommendations") {
  // One user, four items; item 0 is a train positive so the candidate top-2
  // over the rest is {2, 3} (scores 0.8, 0.6). Only item 2 was selected.
  EmbeddingModel m;
  m.dim = 1;
  m.user_factors = Matrix(1, 1);
  m.user_factors.row(0)[0] = 1.0f;
  m.item_factors = Matrix(4, 1);
  m.item_factors.row(0)[0] = 0.9f;
  m.item_factors.row(1)[0] = 0.1f;
  m.item_factors.row(2)[0] = 0.8f;
  m.item_factors.row(3)[0] = 0.6f;
  InteractionDataset train = dataset_from_pairs(1, 4, {{0, 0}});

  std::vector<std::unordered_set<ItemId>> selected(1);
  selected[0].insert(2);
  CHECK(fpp_rate(m, train, selected, 2) == doctest::Approx(0.5).epsilon(1e-12));
  selected[0].insert(3);
  CHECK(fpp_rate(m, train, selected, 2) == doctest::Approx(0.0).epsilon(1e-12));
  selected[0].clear();
  CHECK(fpp_rate(m, train, selected, 2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trailing trend slope recovers exact lines") {
  std::vector<double> line(20);
  for (int i = 0; i < 20; ++i) line[static_cast<std::size_t>(i)] = 3.0 - 0.5 * i;
  CHECK(trend_slope(line, 0.5) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(trend_slope(line, 1.0) == doctest::Approx(-0.5).epsilon(1e-12));

  SUBCASE("window restriction sees only the tail") {
    // Flat first half, rising second half: full-window slope is lower than
    // the pure tail slope.
    std::vector<double> bent(20, 1.0);
    for (int i = 10; i < 20; ++i) {
      bent[static_cast<std::size_t>(i)] = 1.0 + (i - 9) * 2.0;
    }
    CHECK(trend_slope(bent, 0.5) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(trend_slope(bent, 1.0) < 2.0);
  }

  SUBCASE("degenerate windows throw") {
    CHECK_THROWS_AS(trend_slope(std::vector<double>{1.0}, 1.0), ContractError);
    CHECK_THROWS_AS(trend_slope(line, 0.05), ContractError);
  }

  SUBCASE("matches closed-form least squares against noisy data") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unif(-1, 1);
    std::vector<double> series(30);
    for (auto& x : series) x = unif(rng);
    const std::size_t start = 15;  // window_fraction 0.5
    const std::size_t n = series.size() - start;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(i);
      const double y = series[start + i];
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double dn = static_cast<double>(n);
    const double expect = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    CHECK(trend_slope(series, 0.5) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("per-epoch reports round-trip through both formats") {
  TempDir tmp;
  std::vector<EpochTelemetry> rows{sample_row(0), sample_row(1)};
  rows[1].mean_loss.reset();
  rows[1].hardness.reset();
  rows[1].metrics.reset();

  RunReportHeader header;
  header.config_hash = "00ff00ff00ff00ff";
  header.seed = 42;
  header.tool_version = "0.1.0";
  header.sampler = "ahns:m=8,alpha=1,beta=0.5,p=-2";

  SUBCASE("csv preserves rows; header line is pinned") {
    const fs::path p = tmp.path / "report.csv";
    emit_run_report(rows, p, ReportFormat::kCsv, &header);
    const std::string text = slurp(p);
    // First line is exactly the column header so loaders can verify it.
    CHECK(text.rfind(std::string(kReportCsvHeader) + "\n", 0) == 0);
    CHECK(std::string(kReportCsvHeader) ==
          "epoch,mean_loss,hard_mean,hard_median,hard_p10,hard_p90,"
          "hard_defined_frac,fn_rate,recall20,ndcg20,ndcg50,seconds");

    std::vector<EpochTelemetry> back = load_report_csv(p);
    REQUIRE(back.size() == 2);
    // The csv drops the batch count; everything else survives.
    for (std::size_t i = 0; i < 2; ++i) {
      EpochTelemetry want = rows[i];
      want.batches = 0;
      CHECK(back[i] == want);
    }
  }

  SUBCASE("json preserves rows exactly") {
    const fs::path p = tmp.path / "report.json";
    emit_run_report(rows, p, ReportFormat::kJson, &header);
    std::vector<EpochTelemetry> back = load_report_json(p);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == rows[0]);
    CHECK(back[1] == rows[1]);
    const std::string text = slurp(p);
    CHECK(text.find("\"config_hash\"") != std::string::npos);
    CHECK(text.find("\"schema_version\"") != std::string::npos);
  }

  SUBCASE("emitting without a header still loads") {
    const fs::path p = tmp.path / "plain.csv";
    emit_run_report(rows, p, ReportFormat::kCsv, nullptr);
    CHECK(load_report_csv(p).size() == 2);
  }

  SUBCASE("values survive byte-exactly through csv text") {
    std::vector<EpochTelemetry> awkward{sample_row(0)};
    awkward[0].mean_loss = 0.1;  // not exactly representable
    awkward[0].hardness->mean = 1.0 / 3.0;
    const fs::path p = tmp.path / "exact.csv";
    emit_run_report(awkward, p, ReportFormat::kCsv, nullptr);
    std::vector<EpochTelemetry> back = load_report_csv(p);
    REQUIRE(back.size() == 1);
    CHECK(*back[0].mean_loss == 0.1);
    CHECK(back[0].hardness->mean == 1.0 / 3.0);
  }

  SUBCASE("corrupt csv headers are rejected") {
    const fs::path p = tmp.path / "bad.csv";
    std::ofstream(p) << "epoch,loss\n0,1\n";
    CHECK_THROWS_AS(load_report_csv(p), ParseError);
    const fs::path p2 = tmp.path / "short.csv";
    std::ofstream(p2) << kReportCsvHeader << "\n0,1,2\n";
    CHECK_THROWS_AS(load_report_csv(p2), ParseError);
    CHECK_THROWS_AS(load_report_csv(tmp.path / "missing.csv"), IoError);
  }
}
