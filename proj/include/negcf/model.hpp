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
#include <span>
#include <vector>

#include "negcf/core.hpp"
#include "negcf/data.hpp"

namespace negcf {

// Matrix-factorization model: score(u, i) = <user_factors[u], item_factors[i]>.
struct EmbeddingModel {
  Matrix user_factors;
  Matrix item_factors;
  int dim = 0;

  double score(UserId u, ItemId i) const {
    return dot(user_factors.row(u), item_factors.row(i));
  }

  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;
};

// Xavier-uniform init: entries from [-sqrt(6/(fan_in+fan_out)), +...] with
// fan_in = fan_out = dim. Deterministic under seed.
EmbeddingModel xavier_init(UserId num_users, ItemId num_items, int dim,
                           std::uint64_t seed);

double xavier_bound(int dim);

// -ln sigmoid(s_pos - s_neg), evaluated as softplus(-(s_pos - s_neg)) so
// large margins neither overflow nor round to -0.
double bpr_loss(double s_pos, double s_neg);

// d(bpr_loss)/d(s_neg - s_pos) weight shared by all three gradients.
inline double bpr_sigma(double s_pos, double s_neg) {
  return sigmoid(s_neg - s_pos);
}

struct BprGradients {
  std::vector<double> user;
  std::vector<double> pos;
  std::vector<double> neg;
};

// Analytic gradients of bpr_loss over the three embeddings:
//   g_u = c (e_neg - e_pos),  g_pos = -c e_u,  g_neg = c e_u,
// with c = sigmoid(s_neg - s_pos).
BprGradients bpr_gradients(std::span<const double> e_user,
                           std::span<const double> e_pos,
                           std::span<const double> e_neg);

struct AdamParams {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // L2, folded into the gradient of touched rows

  friend bool operator==(const AdamParams&, const AdamParams&) = default;
};

// Sparse per-row gradient accumulator for one parameter matrix. Gradients
// are accumulated in 64-bit; rows are applied in ascending order.
class RowGradients {
 public:
  RowGradients(std::int64_t num_rows, int dim);

  void accumulate(std::int64_t row, double scale, std::span<const float> v);
  void accumulate(std::int64_t row, std::span<const double> g);
  void scale_all(double factor);
  void clear();

  std::span<const double> row(std::int64_t r) const;
  const std::vector<std::int64_t>& touched_sorted();
  bool touches(std::int64_t row) const { return touched_flag_[row] != 0; }
  int dim() const { return dim_; }

 private:
  int dim_ = 0;
  std::vector<double> buffer_;
  std::vector<char> touched_flag_;
  std::vector<std::int64_t> touched_;
  bool sorted_ = false;
};

// Adam moments for one parameter matrix. The step counter advances once per
// applied batch; only rows present in the gradient advance their moments
// (sparse semantics).
struct AdamState {
  AdamState() = default;
  AdamState(std::int64_t num_rows, int dim)
      : m(num_rows, dim), v(num_rows, dim) {}

  struct Moments {
    Moments() = default;
    Moments(std::int64_t rows, int dim)
        : data(static_cast<std::size_t>(rows) * dim, 0.0),
          cols(dim) {}
    std::span<double> row(std::int64_t r) {
      return std::span<double>(data.data() + r * cols,
                               static_cast<std::size_t>(cols));
    }
    std::vector<double> data;
    int cols = 0;
  };

  Moments m;
  Moments v;
  std::int64_t t = 0;
};

// One bias-corrected Adam step over the touched rows of params.
void adam_step(Matrix& params, RowGradients& grads, AdamState& state,
               const AdamParams& hp);

// Checkpoint: small binary header (version, num_users, num_items, dim)
// followed by both factor matrices row-major; round-trips bit-exactly.
void save_checkpoint(const EmbeddingModel& model,
                     const std::filesystem::path& path);
EmbeddingModel load_checkpoint(const std::filesystem::path& path);

}  // namespace negcf
