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
#include <vector>

#include "negcf/data.hpp"
#include "negcf/model.hpp"
#include "negcf/samplers.hpp"

namespace negcf {

enum class DataSource { kFile, kSynth };

struct DataConfig {
  DataSource source = DataSource::kSynth;
  std::string path;
  FileFormat format = FileFormat::kCsv;
  std::optional<double> rating_threshold;

  friend bool operator==(const DataConfig&, const DataConfig&) = default;
};

struct SynthConfig {
  int users = 400;
  int items = 600;
  int dim = 8;
  double scale = 3.0;
  int per_user = 30;
  std::uint64_t seed = 7;

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

struct SplitConfig {
  double test_frac = 0.2;
  double val_frac = 0.1;
  std::uint64_t seed = 1;

  friend bool operator==(const SplitConfig&, const SplitConfig&) = default;
};

struct ModelConfig {
  int dim = 64;
  std::uint64_t init_seed = 2;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct TrainingConfig {
  int epochs = 100;
  int batch_size = 2048;
  bool deterministic = true;
  int workers = 1;
  std::uint64_t seed = 3;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) =
      default;
};

struct EvalConfig {
  std::vector<int> ks = {20, 50};
  int every = 10;  // evaluate every N epochs (and always on the last)

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

struct OutputConfig {
  std::string dir = "run_out";

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct DiagnoseConfig {
  // Compact sampler specs compared side by side on identical data and seeds.
  std::vector<SamplerSpec> samplers = {
      SamplerSpec{.kind = SamplerKind::kRns},
      SamplerSpec{.kind = SamplerKind::kDns},
      SamplerSpec{.kind = SamplerKind::kAhns}};
  double window_fraction = 0.5;  // trailing fraction used for trend slopes

  friend bool operator==(const DiagnoseConfig&, const DiagnoseConfig&) =
      default;
};

struct RunConfig {
  DataConfig data;
  SynthConfig synth;
  SplitConfig split;
  ModelConfig model;
  AdamParams optimizer;
  TrainingConfig training;
  SamplerSpec sampler;
  EvalConfig eval;
  OutputConfig output;
  DiagnoseConfig diagnose;

  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Flat sectioned key=value text. Unknown sections or keys are errors; every
// value round-trips losslessly through serialize/parse.
RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& config);

RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& config, const std::filesystem::path& path);

// Hash of the canonical serialization with the output directory blanked:
// it identifies the computation, so relocating a run's outputs does not
// change its reports.
std::uint64_t config_hash(const RunConfig& config);
std::string config_hash_hex(const RunConfig& config);

}  // namespace negcf
