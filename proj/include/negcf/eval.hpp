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

#include <map>
#include <span>
#include <vector>

#include "negcf/core.hpp"
#include "negcf/data.hpp"
#include "negcf/model.hpp"

namespace negcf {

// Full ranking of one user's candidate items: every item except the
// exclusion set, in descending score order, ties to the lowest item id.
struct RankingResult {
  UserId user = 0;
  std::vector<ItemId> ranked_items;
  std::vector<char> relevance;  // binary, aligned with ranked_items
};

RankingResult rank_items(const EmbeddingModel& model, UserId u,
                         std::span<const ItemId> exclusion_sorted,
                         std::span<const ItemId> test_positives_sorted = {});

double recall_at_k(const RankingResult& ranking,
                   std::span<const ItemId> test_positives_sorted, int k);

// Binary-gain DCG@K / IDCG@K with log2(1 + rank) discounting.
double ndcg_at_k(const RankingResult& ranking,
                 std::span<const ItemId> test_positives_sorted, int k);

// Full-list NDCG (no truncation), as in the lower-bound chain.
double ndcg_full(const RankingResult& ranking,
                 std::span<const ItemId> test_positives_sorted);

// Exact pre-approximation bound on full-list NDCG:
//   (1/|P|) * sum_{i in P} 1 / (1 + sum_{j != i} exp(s_j - s_i)).
// Evaluated through log-sum-exp so large score gaps cannot overflow.
// Requires tie-free scores between positives and other items.
double ndcg_lower_bound(std::span<const double> scores,
                        std::span<const ItemId> positives);

struct UserMetrics {
  UserId user = 0;
  std::map<int, double> recall;  // keyed by K
  std::map<int, double> ndcg;
};

struct EvalResult {
  std::map<int, double> recall;
  std::map<int, double> ndcg;
  int users_evaluated = 0;

  double recall_at(int k) const { return recall.at(k); }
  double ndcg_at(int k) const { return ndcg.at(k); }
};

// Arithmetic mean over users with a non-empty relevance set; throws when no
// user is evaluable.
EvalResult aggregate_metrics(const std::vector<UserMetrics>& per_user);

// Ranks every user against `exclusions` (their train positives) and scores
// against `relevance` (their test positives). Users with empty relevance
// are skipped.
EvalResult evaluate_model(const EmbeddingModel& model,
                          const std::vector<std::vector<ItemId>>& exclusions,
                          const std::vector<std::vector<ItemId>>& relevance,
                          const std::vector<int>& ks);

}  // namespace negcf
