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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "negcf/core.hpp"
#include "negcf/data.hpp"
#include "negcf/model.hpp"

namespace negcf {

// Positive scores at or below this are treated as undefined for the
// hardness ratio; bases at or below zero are clamped to this before a
// fractional power.
constexpr double kHardnessEps = 1e-6;
constexpr double kPowBaseFloor = 1e-6;

enum class SamplerKind { kRns, kPns, kDns, kDnsMn, kAhns };

SamplerKind sampler_kind_from_name(const std::string& name);
std::string sampler_kind_name(SamplerKind kind);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::kRns;
  int m = 8;            // candidate count (DNS, DNS(M,N), AHNS)
  double gamma = 0.75;  // popularity exponent (PNS)
  int n = 1;            // top pool size (DNS(M,N))
  double alpha = 1.0;   // shift (AHNS), > 0
  double beta = 0.1;    // scale (AHNS), > 0
  double p = -2.0;      // exponent (AHNS), < 0

  void validate() const;

  // Compact form "kind" or "kind:key=val,key=val", e.g.
  // "ahns:m=8,alpha=1,beta=0.5,p=-2". Used by config files and flags.
  static SamplerSpec from_string(const std::string& text);
  std::string to_string() const;

  friend bool operator==(const SamplerSpec&, const SamplerSpec&) = default;
};

struct SampledNegative {
  ItemId item = -1;
  double score_at_selection = 0.0;
  std::optional<double> hardness_at_selection;
  int candidate_count_used = 0;
};

// Hardness of a negative relative to its positive: s_neg / s_pos, defined
// only when the positive score is meaningfully positive.
std::optional<double> hardness(double s_neg, double s_pos);

// Distance of a candidate's score from the positive-dependent target
// beta * (s_pos + alpha)^(p+1). Non-positive bases are clamped so the
// fractional power stays defined early in training.
double ahns_rating(double s_cand, double s_pos, double alpha, double beta,
                   double p);

// Hardness of the ideal negative: beta * (s_pos + alpha)^p.
double ideal_hardness(double s_pos, double alpha, double beta, double p);

// M uniform draws (with replacement) from the items the user has not
// interacted with in train. Rejection-sampled; throws SamplerError when the
// user has interacted with every item.
std::vector<ItemId> sample_candidates(const InteractionDataset& train,
                                      UserId u, int m, Rng& rng);

// Alias table over popularity^gamma. Built once per dataset binding and then
// read-only shared across draws.
class PopularityTable {
 public:
  PopularityTable(const std::vector<std::int64_t>& popularity, double gamma);

  ItemId draw(Rng& rng) const;
  bool all_zero() const { return all_zero_; }
  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<ItemId> alias_;
  bool all_zero_ = true;
};

SampledNegative rns_sample(const InteractionDataset& train,
                           const EmbeddingModel& model, UserId u, ItemId pos,
                           Rng& rng);
SampledNegative pns_sample(const InteractionDataset& train,
                           const PopularityTable& table,
                           const EmbeddingModel& model, UserId u, ItemId pos,
                           Rng& rng);
SampledNegative dns_sample(const InteractionDataset& train,
                           const EmbeddingModel& model, UserId u, ItemId pos,
                           int m, Rng& rng);
SampledNegative dns_mn_sample(const InteractionDataset& train,
                              const EmbeddingModel& model, UserId u,
                              ItemId pos, int m, int n, Rng& rng);
SampledNegative ahns_select(const InteractionDataset& train,
                            const EmbeddingModel& model, UserId u, ItemId pos,
                            int m, double alpha, double beta, double p,
                            Rng& rng);

// Strategy wrapper dispatching on a validated SamplerSpec. Stateless given
// (model snapshot, dataset, rng); safe to share across worker threads that
// own their rng streams.
class Sampler {
 public:
  Sampler(SamplerSpec spec, const InteractionDataset& train);

  SampledNegative sample(const EmbeddingModel& model, UserId u, ItemId pos,
                         Rng& rng) const;
  const SamplerSpec& spec() const { return spec_; }

 private:
  SamplerSpec spec_;
  const InteractionDataset* train_;
  std::unique_ptr<PopularityTable> popularity_;  // PNS only
};

}  // namespace negcf
