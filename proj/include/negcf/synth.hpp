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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "negcf/core.hpp"
#include "negcf/data.hpp"

namespace negcf {

// Ground-truth planted-factor world: P(user u interacts with item i) =
// sigmoid(scale * <u*, i*>). The simplest setting where matrix
// factorization is well specified, so metric differences are attributable
// to the sampling strategy.
struct LatentWorld {
  UserId num_users = 0;
  ItemId num_items = 0;
  int dim = 0;
  double scale = 1.0;
  std::uint64_t seed = 0;
  std::vector<double> user_factors;  // row-major num_users x dim
  std::vector<double> item_factors;  // row-major num_items x dim

  double interact_prob(UserId u, ItemId i) const;
};

// Factors drawn from a spherical unit Gaussian under the seed.
LatentWorld generate_world(UserId num_users, ItemId num_items, int dim,
                           double scale, std::uint64_t seed);

// Per user, draws per_user_count distinct items with probability
// proportional to interact_prob.
InteractionDataset sample_interactions(const LatentWorld& world,
                                       int per_user_count, Rng& rng);

// Writes the dataset in the csv format the data module accepts
// (header "user,item").
void write_dataset_csv(const InteractionDataset& ds,
                       const std::filesystem::path& path);

}  // namespace negcf
