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
#include <filesystem>
#include <random>
#include <set>
#include <string>

#include <doctest.h>

#include "negcf/synth.hpp"

using namespace negcf;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("negcf_synth_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

TEST_CASE("planted worlds are deterministic in the seed") {
  LatentWorld a = generate_world(20, 30, 4, 2.0, 99);
  LatentWorld b = generate_world(20, 30, 4, 2.0, 99);
  CHECK(a.user_factors == b.user_factors);
  CHECK(a.item_factors == b.item_factors);
  CHECK(a.user_factors.size() == 20u * 4u);
  CHECK(a.item_factors.size() == 30u * 4u);

  LatentWorld c = generate_world(20, 30, 4, 2.0, 100);
  CHECK(a.user_factors != c.user_factors);

  SUBCASE("factor moments look standard normal") {
    LatentWorld big = generate_world(200, 200, 16, 1.0, 5);
    double sum = 0.0, sq = 0.0;
    for (double x : big.user_factors) {
      sum += x;
      sq += x * x;
    }
    const double n = static_cast<double>(big.user_factors.size());
    CHECK(std::fabs(sum / n) < 0.05);
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
  }

  SUBCASE("degenerate shapes are rejected") {
    CHECK_THROWS_AS(generate_world(0, 5, 2, 1.0, 1), ConfigError);
    CHECK_THROWS_AS(generate_world(5, 0, 2, 1.0, 1), ConfigError);
    CHECK_THROWS_AS(generate_world(5, 5, 0, 1.0, 1), ConfigError);
  }
}

TEST_CASE("interaction probability is the squashed scaled inner product") {
  LatentWorld w = generate_world(3, 3, 5, 1.7, 11);
  for (UserId u = 0; u < 3; ++u) {
    for (ItemId i = 0; i < 3; ++i) {
      double dot = 0.0;
      for (int d = 0; d < 5; ++d) {
        dot += w.user_factors[static_cast<std::size_t>(u) * 5 + d] *
               w.item_factors[static_cast<std::size_t>(i) * 5 + d];
      }
      const double p = w.interact_prob(u, i);
      CHECK(p == doctest::Approx(sigmoid(1.7 * dot)).epsilon(1e-12));
      CHECK(p > 0.0);
      CHECK(p < 1.0);
    }
  }
}

TEST_CASE("sampled interactions are distinct per user with exact counts") {
  LatentWorld w = generate_world(25, 40, 6, 2.5, 3);
  Rng rng = stream_rng(12, 0);
  InteractionDataset ds = sample_interactions(w, 8, rng);
  CHECK(ds.num_users == 25);
  CHECK(ds.num_items == 40);
  CHECK(static_cast<std::size_t>(ds.interactions.size()) == 25u * 8u);
  for (UserId u = 0; u < 25; ++u) {
    const auto& items = ds.user_positives[u];
    CHECK(items.size() == 8);
    CHECK(std::adjacent_find(items.begin(), items.end()) == items.end());
    CHECK(std::is_sorted(items.begin(), items.end()));
  }

  SUBCASE("a per-user budget above the catalog clamps to all items") {
    LatentWorld tiny = generate_world(2, 3, 2, 1.0, 4);
    Rng r = stream_rng(1, 0);
    InteractionDataset full = sample_interactions(tiny, 10, r);
    for (UserId u = 0; u < 2; ++u) {
      CHECK(full.user_positives[u].size() == 3);
    }
  }

  SUBCASE("same rng state reproduces the dataset") {
    Rng r1 = stream_rng(9, 4);
    Rng r2 = stream_rng(9, 4);
    InteractionDataset d1 = sample_interactions(w, 5, r1);
    InteractionDataset d2 = sample_interactions(w, 5, r2);
    CHECK(d1.interactions.size() == d2.interactions.size());
    for (std::size_t k = 0; k < d1.interactions.size(); ++k) {
      CHECK(d1.interactions[k].user == d2.interactions[k].user);
      CHECK(d1.interactions[k].item == d2.interactions[k].item);
    }
  }
}

TEST_CASE("high-affinity items are picked far more often") {
  // One dominant direction: users aligned with it should mostly pick the
  // aligned item over the anti-aligned one.
  LatentWorld w;
  w.num_users = 300;
  w.num_items = 2;
  w.dim = 1;
  w.scale = 4.0;
  w.user_factors.assign(300, 1.0);
  w.item_factors = {1.0, -1.0};
  Rng rng = stream_rng(21, 0);
  InteractionDataset ds = sample_interactions(w, 1, rng);
  int aligned = 0;
  for (const auto& it : ds.interactions) {
    if (it.item == 0) ++aligned;
  }
  // p(aligned) / p(anti) = sigmoid(4)/sigmoid(-4), about 54:1.
  CHECK(aligned > 270);
}

TEST_CASE("written datasets parse back identically") {
  TempDir tmp;
  // First rows touch every user and item in increasing order, so the
  // parser's first-appearance interning reproduces the original ids.
  std::vector<UserItem> pairs;
  for (ItemId i = 0; i < 7; ++i) pairs.emplace_back(0, i);
  for (UserId u = 1; u < 5; ++u) {
    pairs.emplace_back(u, static_cast<ItemId>((u * 3) % 7));
    pairs.emplace_back(u, static_cast<ItemId>((u * 5 + 1) % 7));
  }
  InteractionDataset ds = dataset_from_pairs(5, 7, pairs);
  const fs::path p = tmp.path / "synth.csv";
  write_dataset_csv(ds, p);

  InteractionDataset back = parse_interactions(p, FileFormat::kCsv);
  CHECK(back.num_users == ds.num_users);
  CHECK(back.num_items == ds.num_items);
  REQUIRE(back.interactions.size() == ds.interactions.size());
  CHECK(back.user_positives == ds.user_positives);

  SUBCASE("unwritable paths throw") {
    CHECK_THROWS_AS(
        write_dataset_csv(ds, tmp.path / "no_dir" / "x.csv"), IoError);
  }
}

TEST_CASE("sampled worlds survive the csv round trip structurally") {
  // Item ids may be relabeled by first appearance (and unsampled items
  // dropped), but user order and per-user degrees are preserved.
  TempDir tmp;
  LatentWorld w = generate_world(12, 18, 3, 2.0, 6);
  Rng rng = stream_rng(2, 1);
  InteractionDataset ds = sample_interactions(w, 6, rng);
  const fs::path p = tmp.path / "sampled.csv";
  write_dataset_csv(ds, p);

  InteractionDataset back = parse_interactions(p, FileFormat::kCsv);
  CHECK(back.num_users == ds.num_users);
  CHECK(back.num_items <= ds.num_items);
  REQUIRE(back.interactions.size() == ds.interactions.size());
  for (UserId u = 0; u < ds.num_users; ++u) {
    CHECK(back.user_positives[u].size() == ds.user_positives[u].size());
  }
}
