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

#include "negcf/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <string>

namespace negcf {

double LatentWorld::interact_prob(UserId u, ItemId i) const {
  const double* uf = user_factors.data() + static_cast<size_t>(u) * dim;
  const double* itf = item_factors.data() + static_cast<size_t>(i) * dim;
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += uf[k] * itf[k];
  return sigmoid(scale * s);
}

LatentWorld generate_world(UserId num_users, ItemId num_items, int dim,
                           double scale, std::uint64_t seed) {
  if (num_users <= 0 || num_items <= 0 || dim <= 0) {
    throw ConfigError("generate_world: users, items, and dim must be positive");
  }
  LatentWorld w;
  w.num_users = num_users;
  w.num_items = num_items;
  w.dim = dim;
  w.scale = scale;
  w.seed = seed;
  w.user_factors.resize(static_cast<size_t>(num_users) * dim);
  w.item_factors.resize(static_cast<size_t>(num_items) * dim);
  Rng rng = stream_rng(seed, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& x : w.user_factors) x = gauss(rng);
  for (double& x : w.item_factors) x = gauss(rng);
  return w;
}

namespace {

// One weighted draw by CDF inversion over the remaining weights.
ItemId draw_weighted(const std::vector<double>& weights, double total,
                     Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double r = unit(rng) * total;
  double acc = 0.0;
  ItemId last_positive = -1;
  for (ItemId i = 0; i < static_cast<ItemId>(weights.size()); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    acc += weights[i];
    if (r < acc) return i;
  }
  // Rounding can push r past the final bucket; the last live item absorbs it.
  return last_positive;
}

}  // namespace

InteractionDataset sample_interactions(const LatentWorld& world,
                                       int per_user_count, Rng& rng) {
  if (per_user_count <= 0) {
    throw ConfigError("sample_interactions: per_user_count must be positive");
  }
  int take = std::min<int>(per_user_count, world.num_items);
  std::vector<UserItem> pairs;
  pairs.reserve(static_cast<size_t>(world.num_users) * take);
  std::vector<double> weights(static_cast<size_t>(world.num_items));
  for (UserId u = 0; u < world.num_users; ++u) {
    double total = 0.0;
    for (ItemId i = 0; i < world.num_items; ++i) {
      weights[static_cast<size_t>(i)] = world.interact_prob(u, i);
      total += weights[static_cast<size_t>(i)];
    }
    for (int n = 0; n < take; ++n) {
      ItemId picked = draw_weighted(weights, total, rng);
      if (picked < 0) break;  // all mass exhausted
      pairs.emplace_back(u, picked);
      total -= weights[static_cast<size_t>(picked)];
      weights[static_cast<size_t>(picked)] = 0.0;
    }
  }
  return dataset_from_pairs(world.num_users, world.num_items, pairs);
}

void write_dataset_csv(const InteractionDataset& ds,
                       const std::filesystem::path& path) {
  std::string out = "user,item\n";
  for (const Interaction& it : ds.interactions) {
    out += std::to_string(it.user);
    out += ',';
    out += std::to_string(it.item);
    out += '\n';
  }
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (f == nullptr) {
    throw IoError("cannot open for writing: " + path.string());
  }
  size_t written = std::fwrite(out.data(), 1, out.size(), f);
  std::fclose(f);
  if (written != out.size()) {
    throw IoError("short write: " + path.string());
  }
}

}  // namespace negcf
