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

#include "negcf/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>

namespace negcf {

double xavier_bound(int dim) {
  return std::sqrt(6.0 / (2.0 * static_cast<double>(dim)));
}

EmbeddingModel xavier_init(UserId num_users, ItemId num_items, int dim,
                           std::uint64_t seed) {
  if (dim < 1) {
    throw ContractError("embedding dim must be >= 1");
  }
  EmbeddingModel model;
  model.dim = dim;
  model.user_factors = Matrix(num_users, dim);
  model.item_factors = Matrix(num_items, dim);

  const double bound = xavier_bound(dim);
  Rng rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  auto fill = [&](Matrix& mat) {
    for (std::size_t k = 0; k < mat.size(); ++k) {
      mat.data()[k] = static_cast<float>(dist(rng));
    }
  };
  fill(model.user_factors);
  fill(model.item_factors);
  return model;
}

double bpr_loss(double s_pos, double s_neg) {
  return softplus(-(s_pos - s_neg));
}

BprGradients bpr_gradients(std::span<const double> e_user,
                           std::span<const double> e_pos,
                           std::span<const double> e_neg) {
  if (e_user.size() != e_pos.size() || e_user.size() != e_neg.size()) {
    throw ContractError("embedding dimension mismatch in bpr_gradients");
  }
  double s_pos = 0.0, s_neg = 0.0;
  for (std::size_t k = 0; k < e_user.size(); ++k) {
    s_pos += e_user[k] * e_pos[k];
    s_neg += e_user[k] * e_neg[k];
  }
  const double c = bpr_sigma(s_pos, s_neg);

  BprGradients g;
  g.user.resize(e_user.size());
  g.pos.resize(e_user.size());
  g.neg.resize(e_user.size());
  for (std::size_t k = 0; k < e_user.size(); ++k) {
    g.user[k] = c * (e_neg[k] - e_pos[k]);
    g.pos[k] = -c * e_user[k];
    g.neg[k] = c * e_user[k];
  }
  return g;
}

RowGradients::RowGradients(std::int64_t num_rows, int dim)
    : dim_(dim),
      buffer_(static_cast<std::size_t>(num_rows) * dim, 0.0),
      touched_flag_(static_cast<std::size_t>(num_rows), 0) {}

void RowGradients::accumulate(std::int64_t row, double scale,
                              std::span<const float> v) {
  if (static_cast<int>(v.size()) != dim_) {
    throw ContractError("gradient vector dimension mismatch");
  }
  if (!touched_flag_[row]) {
    touched_flag_[row] = 1;
    touched_.push_back(row);
    sorted_ = false;
  }
  double* g = buffer_.data() + row * dim_;
  for (int k = 0; k < dim_; ++k) {
    g[k] += scale * static_cast<double>(v[k]);
  }
}

void RowGradients::accumulate(std::int64_t row, std::span<const double> g_in) {
  if (static_cast<int>(g_in.size()) != dim_) {
    throw ContractError("gradient vector dimension mismatch");
  }
  if (!touched_flag_[row]) {
    touched_flag_[row] = 1;
    touched_.push_back(row);
    sorted_ = false;
  }
  double* g = buffer_.data() + row * dim_;
  for (int k = 0; k < dim_; ++k) {
    g[k] += g_in[k];
  }
}

void RowGradients::scale_all(double factor) {
  for (std::int64_t r : touched_) {
    double* g = buffer_.data() + r * dim_;
    for (int k = 0; k < dim_; ++k) g[k] *= factor;
  }
}

void RowGradients::clear() {
  for (std::int64_t r : touched_) {
    std::fill_n(buffer_.data() + r * dim_, dim_, 0.0);
    touched_flag_[r] = 0;
  }
  touched_.clear();
  sorted_ = true;
}

std::span<const double> RowGradients::row(std::int64_t r) const {
  return std::span<const double>(buffer_.data() + r * dim_,
                                 static_cast<std::size_t>(dim_));
}

const std::vector<std::int64_t>& RowGradients::touched_sorted() {
  if (!sorted_) {
    std::sort(touched_.begin(), touched_.end());
    sorted_ = true;
  }
  return touched_;
}

void adam_step(Matrix& params, RowGradients& grads, AdamState& state,
               const AdamParams& hp) {
  if (params.cols() != grads.dim() || state.m.cols != grads.dim()) {
    throw ContractError("adam_step shape mismatch");
  }
  // Atomic so concurrent workers sharing one state never lose a step count;
  // in sequential mode this compiles to a plain increment.
  const std::int64_t t =
      std::atomic_ref<std::int64_t>(state.t).fetch_add(
          1, std::memory_order_relaxed) +
      1;
  const double bias1 = 1.0 - std::pow(hp.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(hp.beta2, static_cast<double>(t));

  for (std::int64_t r : grads.touched_sorted()) {
    std::span<const double> g = grads.row(r);
    std::span<double> m = state.m.row(r);
    std::span<double> v = state.v.row(r);
    std::span<float> p = params.row(r);
    for (int k = 0; k < grads.dim(); ++k) {
      double gk = g[k];
      if (hp.weight_decay != 0.0) {
        gk += hp.weight_decay * static_cast<double>(p[k]);
      }
      m[k] = hp.beta1 * m[k] + (1.0 - hp.beta1) * gk;
      v[k] = hp.beta2 * v[k] + (1.0 - hp.beta2) * gk * gk;
      const double m_hat = m[k] / bias1;
      const double v_hat = v[k] / bias2;
      p[k] = static_cast<float>(static_cast<double>(p[k]) -
                                hp.lr * m_hat / (std::sqrt(v_hat) + hp.eps));
    }
  }
}

namespace {

constexpr char kCheckpointMagic[8] = {'N', 'E', 'G', 'C', 'F', 'C', 'P', '1'};

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void save_checkpoint(const EmbeddingModel& model,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write checkpoint: " + path.string());
  }
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_u64(out, 1);  // format version
  write_u64(out, static_cast<std::uint64_t>(model.user_factors.rows()));
  write_u64(out, static_cast<std::uint64_t>(model.item_factors.rows()));
  write_u64(out, static_cast<std::uint64_t>(model.dim));
  out.write(reinterpret_cast<const char*>(model.user_factors.data()),
            static_cast<std::streamsize>(model.user_factors.size() *
                                         sizeof(float)));
  out.write(reinterpret_cast<const char*>(model.item_factors.data()),
            static_cast<std::streamsize>(model.item_factors.size() *
                                         sizeof(float)));
  if (!out) {
    throw IoError("error while writing checkpoint: " + path.string());
  }
}

EmbeddingModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open checkpoint: " + path.string());
  }
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw IoError("not a negcf checkpoint: " + path.string());
  }
  const std::uint64_t version = read_u64(in);
  if (version != 1) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint64_t num_users = read_u64(in);
  const std::uint64_t num_items = read_u64(in);
  const std::uint64_t dim = read_u64(in);
  if (!in || dim == 0 || dim > (1u << 20)) {
    throw IoError("corrupt checkpoint header: " + path.string());
  }

  EmbeddingModel model;
  model.dim = static_cast<int>(dim);
  model.user_factors = Matrix(static_cast<std::int64_t>(num_users),
                              static_cast<std::int64_t>(dim));
  model.item_factors = Matrix(static_cast<std::int64_t>(num_items),
                              static_cast<std::int64_t>(dim));
  in.read(reinterpret_cast<char*>(model.user_factors.data()),
          static_cast<std::streamsize>(model.user_factors.size() *
                                       sizeof(float)));
  in.read(reinterpret_cast<char*>(model.item_factors.data()),
          static_cast<std::streamsize>(model.item_factors.size() *
                                       sizeof(float)));
  if (!in) {
    throw IoError("truncated checkpoint: " + path.string());
  }
  char extra = 0;
  if (in.read(&extra, 1)) {
    throw IoError("trailing bytes in checkpoint: " + path.string());
  }
  return model;
}

}  // namespace negcf
