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

#include "negcf/samplers.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <queue>
#include <sstream>

namespace negcf {

namespace {

constexpr int kMaxRejectionAttempts = 10000;

SampledNegative make_selection(const EmbeddingModel& model, UserId u,
                               ItemId pos, ItemId neg, int candidates_used) {
  SampledNegative sel;
  sel.item = neg;
  sel.score_at_selection = model.score(u, neg);
  sel.hardness_at_selection =
      hardness(sel.score_at_selection, model.score(u, pos));
  sel.candidate_count_used = candidates_used;
  return sel;
}

ItemId draw_uninteracted(const InteractionDataset& train, UserId u, Rng& rng) {
  const auto& positives = train.user_positives[u];
  if (static_cast<ItemId>(positives.size()) >= train.num_items) {
    throw SamplerError("user " + std::to_string(u) +
                       " has interacted with every item");
  }
  std::uniform_int_distribution<ItemId> dist(0, train.num_items - 1);
  for (int attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
    ItemId i = dist(rng);
    if (!contains_item(positives, i)) return i;
  }
  throw SamplerError("rejection sampling exhausted for user " +
                     std::to_string(u));
}

}  // namespace

SamplerKind sampler_kind_from_name(const std::string& name) {
  if (name == "rns") return SamplerKind::kRns;
  if (name == "pns") return SamplerKind::kPns;
  if (name == "dns") return SamplerKind::kDns;
  if (name == "dns_mn") return SamplerKind::kDnsMn;
  if (name == "ahns") return SamplerKind::kAhns;
  throw ConfigError("unknown sampler kind '" + name + "'");
}

std::string sampler_kind_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kRns:
      return "rns";
    case SamplerKind::kPns:
      return "pns";
    case SamplerKind::kDns:
      return "dns";
    case SamplerKind::kDnsMn:
      return "dns_mn";
    case SamplerKind::kAhns:
      return "ahns";
  }
  return "rns";
}

void SamplerSpec::validate() const {
  if (m < 1) throw ConfigError("sampler m must be >= 1");
  if (kind == SamplerKind::kPns && gamma < 0.0) {
    throw ConfigError("pns gamma must be >= 0");
  }
  if (kind == SamplerKind::kDnsMn && (n < 1 || n > m)) {
    throw ConfigError("dns_mn requires 1 <= n <= m");
  }
  if (kind == SamplerKind::kAhns) {
    if (!(alpha > 0.0)) throw ConfigError("ahns alpha must be > 0");
    if (!(beta > 0.0)) throw ConfigError("ahns beta must be > 0");
    if (!(p < 0.0)) throw ConfigError("ahns p must be < 0");
  }
}

SamplerSpec SamplerSpec::from_string(const std::string& text) {
  SamplerSpec spec;
  std::string kind_part = text;
  std::string args;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    kind_part = text.substr(0, colon);
    args = text.substr(colon + 1);
  }
  spec.kind = sampler_kind_from_name(kind_part);

  std::stringstream ss(args);
  std::string kv;
  while (std::getline(ss, kv, ',')) {
    if (kv.empty()) continue;
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("bad sampler option '" + kv + "' (want key=value)");
    }
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    try {
      if (key == "m") {
        spec.m = std::stoi(val);
      } else if (key == "gamma") {
        spec.gamma = std::stod(val);
      } else if (key == "n") {
        spec.n = std::stoi(val);
      } else if (key == "alpha") {
        spec.alpha = std::stod(val);
      } else if (key == "beta") {
        spec.beta = std::stod(val);
      } else if (key == "p") {
        spec.p = std::stod(val);
      } else {
        throw ConfigError("unknown sampler option '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad value for sampler option '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

std::string SamplerSpec::to_string() const {
  std::string s = sampler_kind_name(kind);
  switch (kind) {
    case SamplerKind::kRns:
      break;
    case SamplerKind::kPns:
      s += ":gamma=" + double_repr(gamma);
      break;
    case SamplerKind::kDns:
      s += ":m=" + std::to_string(m);
      break;
    case SamplerKind::kDnsMn:
      s += ":m=" + std::to_string(m) + ",n=" + std::to_string(n);
      break;
    case SamplerKind::kAhns:
      s += ":m=" + std::to_string(m) + ",alpha=" + double_repr(alpha) +
           ",beta=" + double_repr(beta) + ",p=" + double_repr(p);
      break;
  }
  return s;
}

std::optional<double> hardness(double s_neg, double s_pos) {
  if (s_pos > kHardnessEps) {
    return s_neg / s_pos;
  }
  return std::nullopt;
}

double ahns_rating(double s_cand, double s_pos, double alpha, double beta,
                   double p) {
  const double base = std::max(s_pos + alpha, kPowBaseFloor);
  const double target = beta * std::pow(base, p + 1.0);
  return std::fabs(s_cand - target);
}

double ideal_hardness(double s_pos, double alpha, double beta, double p) {
  const double base = s_pos + alpha;
  if (!(base > 0.0)) {
    throw ContractError("ideal_hardness requires s_pos + alpha > 0");
  }
  return beta * std::pow(base, p);
}

std::vector<ItemId> sample_candidates(const InteractionDataset& train,
                                      UserId u, int m, Rng& rng) {
  if (m < 1) throw ContractError("candidate count must be >= 1");
  std::vector<ItemId> candidates;
  candidates.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    candidates.push_back(draw_uninteracted(train, u, rng));
  }
  return candidates;
}

PopularityTable::PopularityTable(const std::vector<std::int64_t>& popularity,
                                 double gamma) {
  const std::size_t n = popularity.size();
  std::vector<double> weights(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = std::pow(static_cast<double>(popularity[i]), gamma);
    total += weights[i];
  }
  all_zero_ = !(total > 0.0);
  if (all_zero_) return;

  // Walker alias construction over normalized weights.
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::queue<std::size_t> small, large;
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] / total * static_cast<double>(n);
    if (scaled[i] < 1.0) {
      small.push(i);
    } else {
      large.push(i);
    }
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.front();
    const std::size_t l = large.front();
    small.pop();
    large.pop();
    prob_[s] = scaled[s];
    alias_[s] = static_cast<ItemId>(l);
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      small.push(l);
    } else {
      large.push(l);
    }
  }
  while (!large.empty()) {
    prob_[large.front()] = 1.0;
    large.pop();
  }
  while (!small.empty()) {
    prob_[small.front()] = 1.0;
    small.pop();
  }
}

ItemId PopularityTable::draw(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> slot(0, prob_.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t i = slot(rng);
  if (unit(rng) < prob_[i]) {
    return static_cast<ItemId>(i);
  }
  return alias_[i];
}

SampledNegative rns_sample(const InteractionDataset& train,
                           const EmbeddingModel& model, UserId u, ItemId pos,
                           Rng& rng) {
  const ItemId neg = draw_uninteracted(train, u, rng);
  return make_selection(model, u, pos, neg, 1);
}

SampledNegative pns_sample(const InteractionDataset& train,
                           const PopularityTable& table,
                           const EmbeddingModel& model, UserId u, ItemId pos,
                           Rng& rng) {
  const auto& positives = train.user_positives[u];
  if (static_cast<ItemId>(positives.size()) >= train.num_items) {
    throw SamplerError("user " + std::to_string(u) +
                       " has interacted with every item");
  }
  if (!table.all_zero()) {
    for (int attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
      const ItemId i = table.draw(rng);
      if (!contains_item(positives, i)) {
        return make_selection(model, u, pos, i, 1);
      }
    }
  }
  // All weight sits on this user's positives (or is zero): uniform fallback.
  const ItemId neg = draw_uninteracted(train, u, rng);
  return make_selection(model, u, pos, neg, 1);
}

SampledNegative dns_sample(const InteractionDataset& train,
                           const EmbeddingModel& model, UserId u, ItemId pos,
                           int m, Rng& rng) {
  const std::vector<ItemId> candidates = sample_candidates(train, u, m, rng);
  ItemId best = candidates[0];
  double best_score = model.score(u, best);
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const ItemId cand = candidates[k];
    const double s = model.score(u, cand);
    if (s > best_score || (s == best_score && cand < best)) {
      best = cand;
      best_score = s;
    }
  }
  return make_selection(model, u, pos, best, m);
}

SampledNegative dns_mn_sample(const InteractionDataset& train,
                              const EmbeddingModel& model, UserId u,
                              ItemId pos, int m, int n, Rng& rng) {
  if (n < 1 || n > m) throw ContractError("dns_mn requires 1 <= n <= m");
  const std::vector<ItemId> candidates = sample_candidates(train, u, m, rng);
  std::vector<std::pair<double, ItemId>> scored;
  scored.reserve(candidates.size());
  for (ItemId cand : candidates) {
    scored.emplace_back(model.score(u, cand), cand);
  }
  // Descending score, ties to the lowest item id.
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) {
                     if (a.first != b.first) return a.first > b.first;
                     return a.second < b.second;
                   });
  std::uniform_int_distribution<int> pick(0, n - 1);
  const ItemId neg = scored[static_cast<std::size_t>(pick(rng))].second;
  return make_selection(model, u, pos, neg, m);
}

SampledNegative ahns_select(const InteractionDataset& train,
                            const EmbeddingModel& model, UserId u, ItemId pos,
                            int m, double alpha, double beta, double p,
                            Rng& rng) {
  const std::vector<ItemId> candidates = sample_candidates(train, u, m, rng);
  const double s_pos = model.score(u, pos);
  ItemId best = candidates[0];
  double best_rating = ahns_rating(model.score(u, best), s_pos, alpha, beta, p);
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const ItemId cand = candidates[k];
    const double r = ahns_rating(model.score(u, cand), s_pos, alpha, beta, p);
    if (r < best_rating || (r == best_rating && cand < best)) {
      best = cand;
      best_rating = r;
    }
  }
  return make_selection(model, u, pos, best, m);
}

Sampler::Sampler(SamplerSpec spec, const InteractionDataset& train)
    : spec_(spec), train_(&train) {
  spec_.validate();
  if (spec_.kind == SamplerKind::kPns) {
    popularity_ =
        std::make_unique<PopularityTable>(train.item_popularity, spec_.gamma);
  }
}

SampledNegative Sampler::sample(const EmbeddingModel& model, UserId u,
                                ItemId pos, Rng& rng) const {
  switch (spec_.kind) {
    case SamplerKind::kRns:
      return rns_sample(*train_, model, u, pos, rng);
    case SamplerKind::kPns:
      return pns_sample(*train_, *popularity_, model, u, pos, rng);
    case SamplerKind::kDns:
      return dns_sample(*train_, model, u, pos, spec_.m, rng);
    case SamplerKind::kDnsMn:
      return dns_mn_sample(*train_, model, u, pos, spec_.m, spec_.n, rng);
    case SamplerKind::kAhns:
      return ahns_select(*train_, model, u, pos, spec_.m, spec_.alpha,
                         spec_.beta, spec_.p, rng);
  }
  throw ContractError("unreachable sampler kind");
}

}  // namespace negcf
