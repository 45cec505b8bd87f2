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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "negcf/core.hpp"

namespace negcf {

using ItemId = std::int32_t;
using UserId = std::int32_t;
using UserItem = std::pair<UserId, ItemId>;

struct Interaction {
  UserId user = 0;
  ItemId item = 0;
  std::int64_t timestamp = -1;  // -1 when the source has no timestamp column

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

// Implicit-feedback dataset: every retained row is a positive, ids are
// contiguous 0-based, (user, item) pairs are deduplicated.
struct InteractionDataset {
  UserId num_users = 0;
  ItemId num_items = 0;
  std::vector<Interaction> interactions;
  std::vector<std::vector<ItemId>> user_positives;  // sorted, per user
  std::vector<std::int64_t> item_popularity;

  bool has_positive(UserId u, ItemId i) const;
  std::int64_t total_interactions() const {
    return static_cast<std::int64_t>(interactions.size());
  }
};

enum class FileFormat { kMovieLensDat, kMovieLensTsv, kCsv };

FileFormat file_format_from_name(const std::string& name);
std::string file_format_name(FileFormat format);

// Reads an interaction log. Rows with rating < rating_threshold are dropped
// when a threshold is given; duplicate (user, item) pairs collapse to the
// first occurrence. Ids (any token, not just integers) are remapped to
// contiguous 0-based indices in first-appearance order.
InteractionDataset parse_interactions(
    const std::filesystem::path& path, FileFormat format,
    std::optional<double> rating_threshold = std::nullopt);

// Builds a dataset over an explicit pair list, e.g. the train section of a
// manifest. num_users/num_items keep the full dataset's bounds so item ids
// outside the pair list remain valid sampling candidates.
InteractionDataset dataset_from_pairs(UserId num_users, ItemId num_items,
                                      const std::vector<UserItem>& pairs);

struct SplitManifest {
  std::uint64_t seed = 0;
  double train_frac = 0.8;
  double test_frac = 0.2;
  double val_frac = 0.1;  // fraction of the train pool moved to validation
  std::vector<UserItem> train;
  std::vector<UserItem> val;
  std::vector<UserItem> test;

  friend bool operator==(const SplitManifest&, const SplitManifest&) = default;
};

// Per-user random split: shuffle each user's interactions under the seed,
// send the last ceil(test_frac * n) to test, then draw validation from the
// remaining pool. Users always keep at least one interaction in train.
SplitManifest split_dataset(const InteractionDataset& ds, double test_frac,
                            double val_frac_of_train, std::uint64_t seed);

void save_manifest(const SplitManifest& manifest,
                   const std::filesystem::path& path);
SplitManifest load_manifest(const std::filesystem::path& path);

// Bounds check against a dataset; throws ManifestError on out-of-range ids.
void validate_manifest(const SplitManifest& manifest,
                       const InteractionDataset& ds);

// Per-user sorted item lists for an arbitrary pair set (test/val relevance).
std::vector<std::vector<ItemId>> positives_by_user(
    UserId num_users, const std::vector<UserItem>& pairs);

bool contains_item(const std::vector<ItemId>& sorted_items, ItemId item);

}  // namespace negcf
