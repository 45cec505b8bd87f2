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

#include "negcf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace negcf {

RankingResult rank_items(const EmbeddingModel& model, UserId u,
                         std::span<const ItemId> exclusion_sorted,
                         std::span<const ItemId> test_positives_sorted) {
  const ItemId num_items = static_cast<ItemId>(model.item_factors.rows());
  RankingResult result;
  result.user = u;

  std::vector<std::pair<double, ItemId>> scored;
  scored.reserve(static_cast<std::size_t>(num_items));
  for (ItemId i = 0; i < num_items; ++i) {
    if (std::binary_search(exclusion_sorted.begin(), exclusion_sorted.end(),
                           i)) {
      continue;
    }
    scored.emplace_back(model.score(u, i), i);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  result.ranked_items.reserve(scored.size());
  result.relevance.reserve(scored.size());
  for (const auto& [score, item] : scored) {
    result.ranked_items.push_back(item);
    result.relevance.push_back(
        std::binary_search(test_positives_sorted.begin(),
                           test_positives_sorted.end(), item)
            ? 1
            : 0);
  }
  return result;
}

double recall_at_k(const RankingResult& ranking,
                   std::span<const ItemId> test_positives_sorted, int k) {
  if (k < 1) throw ContractError("recall_at_k requires k >= 1");
  if (test_positives_sorted.empty()) return 0.0;
  const std::size_t top = std::min<std::size_t>(
      static_cast<std::size_t>(k), ranking.ranked_items.size());
  std::int64_t hits = 0;
  for (std::size_t r = 0; r < top; ++r) {
    if (std::binary_search(test_positives_sorted.begin(),
                           test_positives_sorted.end(),
                           ranking.ranked_items[r])) {
      ++hits;
    }
  }
  return static_cast<double>(hits) /
         static_cast<double>(test_positives_sorted.size());
}

namespace {

double dcg_at_k(const RankingResult& ranking,
                std::span<const ItemId> test_positives_sorted, std::size_t k) {
  const std::size_t top = std::min(k, ranking.ranked_items.size());
  double dcg = 0.0;
  for (std::size_t r = 0; r < top; ++r) {
    if (std::binary_search(test_positives_sorted.begin(),
                           test_positives_sorted.end(),
                           ranking.ranked_items[r])) {
      dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    }
  }
  return dcg;
}

double idcg_at_k(std::size_t num_positives, std::size_t k) {
  const std::size_t top = std::min(k, num_positives);
  double idcg = 0.0;
  for (std::size_t r = 0; r < top; ++r) {
    idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  return idcg;
}

}  // namespace

double ndcg_at_k(const RankingResult& ranking,
                 std::span<const ItemId> test_positives_sorted, int k) {
  if (k < 1) throw ContractError("ndcg_at_k requires k >= 1");
  if (test_positives_sorted.empty()) return 0.0;
  const double idcg = idcg_at_k(test_positives_sorted.size(),
                                static_cast<std::size_t>(k));
  if (idcg == 0.0) return 0.0;
  return dcg_at_k(ranking, test_positives_sorted,
                  static_cast<std::size_t>(k)) /
         idcg;
}

double ndcg_full(const RankingResult& ranking,
                 std::span<const ItemId> test_positives_sorted) {
  if (test_positives_sorted.empty()) return 0.0;
  const std::size_t n = ranking.ranked_items.size();
  const double idcg = idcg_at_k(test_positives_sorted.size(), n);
  if (idcg == 0.0) return 0.0;
  return dcg_at_k(ranking, test_positives_sorted, n) / idcg;
}

double ndcg_lower_bound(std::span<const double> scores,
                        std::span<const ItemId> positives) {
  if (positives.empty()) {
    throw ContractError("ndcg_lower_bound needs at least one positive");
  }
  double sum = 0.0;
  for (ItemId i : positives) {
    const double s_i = scores[static_cast<std::size_t>(i)];
    // log(sum_{j != i} exp(s_j - s_i)) via a running max for stability.
    double max_diff = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (static_cast<ItemId>(j) == i) continue;
      max_diff = std::max(max_diff, scores[j] - s_i);
    }
    if (!std::isfinite(max_diff)) {
      // Single-item list: the positive is trivially at rank 1.
      sum += 1.0;
      continue;
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (static_cast<ItemId>(j) == i) continue;
      acc += std::exp(scores[j] - s_i - max_diff);
    }
    const double lse = max_diff + std::log(acc);
    // 1 / (1 + exp(lse)) = sigmoid(-lse), stable on both tails.
    sum += sigmoid(-lse);
  }
  return sum / static_cast<double>(positives.size());
}

EvalResult aggregate_metrics(const std::vector<UserMetrics>& per_user) {
  EvalResult out;
  for (const auto& um : per_user) {
    for (const auto& [k, v] : um.recall) out.recall[k] += v;
    for (const auto& [k, v] : um.ndcg) out.ndcg[k] += v;
    ++out.users_evaluated;
  }
  if (out.users_evaluated == 0) {
    throw ContractError("no evaluable users (all test sets empty)");
  }
  for (auto& [k, v] : out.recall) v /= out.users_evaluated;
  for (auto& [k, v] : out.ndcg) v /= out.users_evaluated;
  return out;
}

EvalResult evaluate_model(const EmbeddingModel& model,
                          const std::vector<std::vector<ItemId>>& exclusions,
                          const std::vector<std::vector<ItemId>>& relevance,
                          const std::vector<int>& ks) {
  const UserId num_users = static_cast<UserId>(model.user_factors.rows());
  if (static_cast<UserId>(exclusions.size()) != num_users ||
      static_cast<UserId>(relevance.size()) != num_users) {
    throw ContractError("evaluate_model: per-user list sizes disagree with "
                        "model");
  }
  std::vector<UserMetrics> per_user;
  for (UserId u = 0; u < num_users; ++u) {
    if (relevance[u].empty()) continue;  // skipped at aggregation
    RankingResult ranking = rank_items(model, u, exclusions[u], relevance[u]);
    UserMetrics um;
    um.user = u;
    for (int k : ks) {
      um.recall[k] = recall_at_k(ranking, relevance[u], k);
      um.ndcg[k] = ndcg_at_k(ranking, relevance[u], k);
    }
    per_user.push_back(std::move(um));
  }
  return aggregate_metrics(per_user);
}

}  // namespace negcf
