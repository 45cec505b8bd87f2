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

#include "negcf/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace negcf {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, int line) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    fail(line, "expected a number, got '" + v + "'");
  }
  if (!std::isfinite(out)) fail(line, "value must be finite");
  return out;
}

int parse_int(const std::string& v, int line) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    fail(line, "expected an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& v, int line) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    fail(line, "expected an unsigned integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(line, "expected true/false, got '" + v + "'");
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  if (parts.size() == 1 && parts[0].empty()) parts.clear();
  return parts;
}

std::vector<int> parse_int_list(const std::string& v, int line) {
  std::vector<int> out;
  for (const std::string& part : split_on(v, ',')) {
    out.push_back(parse_int(part, line));
  }
  return out;
}

std::vector<SamplerSpec> parse_sampler_list(const std::string& v, int line) {
  std::vector<SamplerSpec> out;
  for (const std::string& part : split_on(v, ';')) {
    try {
      out.push_back(SamplerSpec::from_string(part));
    } catch (const Error& e) {
      fail(line, e.what());
    }
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_samplers(const std::vector<SamplerSpec>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ';';
    out += v[i].to_string();
  }
  return out;
}

void apply_data(DataConfig& c, const std::string& key, const std::string& val,
                int line) {
  if (key == "source") {
    if (val == "file") {
      c.source = DataSource::kFile;
    } else if (val == "synth") {
      c.source = DataSource::kSynth;
    } else {
      fail(line, "source must be 'file' or 'synth'");
    }
  } else if (key == "path") {
    c.path = val;
  } else if (key == "format") {
    try {
      c.format = file_format_from_name(val);
    } catch (const Error& e) {
      fail(line, e.what());
    }
  } else if (key == "rating_threshold") {
    if (val.empty()) {
      c.rating_threshold.reset();
    } else {
      c.rating_threshold = parse_double(val, line);
    }
  } else {
    fail(line, "unknown key '" + key + "' in [data]");
  }
}

void apply_synth(SynthConfig& c, const std::string& key, const std::string& val,
                 int line) {
  if (key == "users") {
    c.users = parse_int(val, line);
  } else if (key == "items") {
    c.items = parse_int(val, line);
  } else if (key == "dim") {
    c.dim = parse_int(val, line);
  } else if (key == "scale") {
    c.scale = parse_double(val, line);
  } else if (key == "per_user") {
    c.per_user = parse_int(val, line);
  } else if (key == "seed") {
    c.seed = parse_u64(val, line);
  } else {
    fail(line, "unknown key '" + key + "' in [synth]");
  }
}

void apply_split(SplitConfig& c, const std::string& key, const std::string& val,
                 int line) {
  if (key == "test_frac") {
    c.test_frac = parse_double(val, line);
  } else if (key == "val_frac") {
    c.val_frac = parse_double(val, line);
  } else if (key == "seed") {
    c.seed = parse_u64(val, line);
  } else {
    fail(line, "unknown key '" + key + "' in [split]");
  }
}

void apply_model(ModelConfig& c, const std::string& key, const std::string& val,
                 int line) {
  if (key == "dim") {
    c.dim = parse_int(val, line);
  } else if (key == "init_seed") {
    c.init_seed = parse_u64(val, line);
  } else {
    fail(line, "unknown key '" + key + "' in [model]");
  }
}

void apply_optimizer(AdamParams& c, const std::string& key,
                     const std::string& val, int line) {
  if (key == "lr") {
    c.lr = parse_double(val, line);
  } else if (key == "beta1") {
    c.beta1 = parse_double(val, line);
  } else if (key == "beta2") {
    c.beta2 = parse_double(val, line);
  } else if (key == "eps") {
    c.eps = parse_double(val, line);
  } else if (key == "weight_decay") {
    c.weight_decay = parse_double(val, line);
  } else {
    fail(line, "unknown key '" + key + "' in [optimizer]");
  }
}

void apply_training(TrainingConfig& c, const std::string& key,
                    const std::string& val, int line) {
  if (key == "epochs") {
    c.epochs = parse_int(val, line);
  } else if (key == "batch_size") {
    c.batch_size = parse_int(val, line);
  } else if (key == "deterministic") {
    c.deterministic = parse_bool(val, line);
  } else if (key == "workers") {
    c.workers = parse_int(val, line);
  } else if (key == "seed") {
    c.seed = parse_u64(val, line);
  } else {
    fail(line, "unknown key '" + key + "' in [training]");
  }
}

void apply_sampler(SamplerSpec& c, const std::string& key,
                   const std::string& val, int line) {
  if (key == "kind") {
    try {
      c.kind = sampler_kind_from_name(val);
    } catch (const Error& e) {
      fail(line, e.what());
    }
  } else if (key == "m") {
    c.m = parse_int(val, line);
  } else if (key == "gamma") {
    c.gamma = parse_double(val, line);
  } else if (key == "n") {
    c.n = parse_int(val, line);
  } else if (key == "alpha") {
    c.alpha = parse_double(val, line);
  } else if (key == "beta") {
    c.beta = parse_double(val, line);
  } else if (key == "p") {
    c.p = parse_double(val, line);
  } else {
    fail(line, "unknown key '" + key + "' in [sampler]");
  }
}

void apply_eval(EvalConfig& c, const std::string& key, const std::string& val,
                int line) {
  if (key == "ks") {
    c.ks = parse_int_list(val, line);
  } else if (key == "every") {
    c.every = parse_int(val, line);
  } else {
    fail(line, "unknown key '" + key + "' in [eval]");
  }
}

void apply_output(OutputConfig& c, const std::string& key,
                  const std::string& val, int line) {
  if (key == "dir") {
    c.dir = val;
  } else {
    fail(line, "unknown key '" + key + "' in [output]");
  }
}

void apply_diagnose(DiagnoseConfig& c, const std::string& key,
                    const std::string& val, int line) {
  if (key == "samplers") {
    c.samplers = parse_sampler_list(val, line);
  } else if (key == "window_fraction") {
    c.window_fraction = parse_double(val, line);
  } else {
    fail(line, "unknown key '" + key + "' in [diagnose]");
  }
}

}  // namespace

void RunConfig::validate() const {
  if (data.source == DataSource::kFile && data.path.empty()) {
    throw ConfigError("[data] path is required when source = file");
  }
  if (synth.users <= 0 || synth.items <= 0 || synth.dim <= 0 ||
      synth.per_user <= 0) {
    throw ConfigError("[synth] users, items, dim, per_user must be positive");
  }
  if (!std::isfinite(synth.scale)) {
    throw ConfigError("[synth] scale must be finite");
  }
  if (!(split.test_frac > 0.0 && split.test_frac < 1.0)) {
    throw ConfigError("[split] test_frac must be in (0, 1)");
  }
  if (!(split.val_frac >= 0.0 && split.val_frac < 1.0)) {
    throw ConfigError("[split] val_frac must be in [0, 1)");
  }
  if (model.dim <= 0) {
    throw ConfigError("[model] dim must be positive");
  }
  if (!(optimizer.lr > 0.0)) {
    throw ConfigError("[optimizer] lr must be positive");
  }
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0) ||
      !(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0)) {
    throw ConfigError("[optimizer] beta1 and beta2 must be in [0, 1)");
  }
  if (!(optimizer.eps > 0.0)) {
    throw ConfigError("[optimizer] eps must be positive");
  }
  if (optimizer.weight_decay < 0.0) {
    throw ConfigError("[optimizer] weight_decay must be non-negative");
  }
  if (training.epochs <= 0) {
    throw ConfigError("[training] epochs must be positive");
  }
  if (training.batch_size <= 0) {
    throw ConfigError("[training] batch_size must be positive");
  }
  if (training.workers <= 0) {
    throw ConfigError("[training] workers must be positive");
  }
  if (training.deterministic && training.workers != 1) {
    throw ConfigError("[training] deterministic runs require workers = 1");
  }
  sampler.validate();
  if (eval.ks.empty()) {
    throw ConfigError("[eval] ks must list at least one cutoff");
  }
  for (int k : eval.ks) {
    if (k <= 0) throw ConfigError("[eval] cutoffs must be positive");
  }
  if (eval.every <= 0) {
    throw ConfigError("[eval] every must be positive");
  }
  if (output.dir.empty()) {
    throw ConfigError("[output] dir must not be empty");
  }
  for (const SamplerSpec& s : diagnose.samplers) s.validate();
  if (!(diagnose.window_fraction > 0.0 && diagnose.window_fraction <= 1.0)) {
    throw ConfigError("[diagnose] window_fraction must be in (0, 1]");
  }
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "data" && section != "synth" && section != "split" &&
          section != "model" && section != "optimizer" &&
          section != "training" && section != "sampler" && section != "eval" &&
          section != "output" && section != "diagnose") {
        fail(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(line_no, "expected 'key = value', got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (section.empty()) fail(line_no, "key before any [section]");
    if (section == "data") {
      apply_data(c.data, key, val, line_no);
    } else if (section == "synth") {
      apply_synth(c.synth, key, val, line_no);
    } else if (section == "split") {
      apply_split(c.split, key, val, line_no);
    } else if (section == "model") {
      apply_model(c.model, key, val, line_no);
    } else if (section == "optimizer") {
      apply_optimizer(c.optimizer, key, val, line_no);
    } else if (section == "training") {
      apply_training(c.training, key, val, line_no);
    } else if (section == "sampler") {
      apply_sampler(c.sampler, key, val, line_no);
    } else if (section == "eval") {
      apply_eval(c.eval, key, val, line_no);
    } else if (section == "output") {
      apply_output(c.output, key, val, line_no);
    } else if (section == "diagnose") {
      apply_diagnose(c.diagnose, key, val, line_no);
    }
  }
  c.validate();
  return c;
}

std::string serialize_config(const RunConfig& c) {
  std::string out;
  auto kv = [&out](const char* key, const std::string& val) {
    out += key;
    out += " = ";
    out += val;
    out += '\n';
  };
  out += "[data]\n";
  kv("source", c.data.source == DataSource::kFile ? "file" : "synth");
  kv("path", c.data.path);
  kv("format", file_format_name(c.data.format));
  if (c.data.rating_threshold) {
    kv("rating_threshold", double_repr(*c.data.rating_threshold));
  }
  out += "\n[synth]\n";
  kv("users", std::to_string(c.synth.users));
  kv("items", std::to_string(c.synth.items));
  kv("dim", std::to_string(c.synth.dim));
  kv("scale", double_repr(c.synth.scale));
  kv("per_user", std::to_string(c.synth.per_user));
  kv("seed", std::to_string(c.synth.seed));
  out += "\n[split]\n";
  kv("test_frac", double_repr(c.split.test_frac));
  kv("val_frac", double_repr(c.split.val_frac));
  kv("seed", std::to_string(c.split.seed));
  out += "\n[model]\n";
  kv("dim", std::to_string(c.model.dim));
  kv("init_seed", std::to_string(c.model.init_seed));
  out += "\n[optimizer]\n";
  kv("lr", double_repr(c.optimizer.lr));
  kv("beta1", double_repr(c.optimizer.beta1));
  kv("beta2", double_repr(c.optimizer.beta2));
  kv("eps", double_repr(c.optimizer.eps));
  kv("weight_decay", double_repr(c.optimizer.weight_decay));
  out += "\n[training]\n";
  kv("epochs", std::to_string(c.training.epochs));
  kv("batch_size", std::to_string(c.training.batch_size));
  kv("deterministic", c.training.deterministic ? "true" : "false");
  kv("workers", std::to_string(c.training.workers));
  kv("seed", std::to_string(c.training.seed));
  out += "\n[sampler]\n";
  kv("kind", sampler_kind_name(c.sampler.kind));
  kv("m", std::to_string(c.sampler.m));
  kv("gamma", double_repr(c.sampler.gamma));
  kv("n", std::to_string(c.sampler.n));
  kv("alpha", double_repr(c.sampler.alpha));
  kv("beta", double_repr(c.sampler.beta));
  kv("p", double_repr(c.sampler.p));
  out += "\n[eval]\n";
  kv("ks", join_ints(c.eval.ks));
  kv("every", std::to_string(c.eval.every));
  out += "\n[output]\n";
  kv("dir", c.output.dir);
  out += "\n[diagnose]\n";
  kv("samplers", join_samplers(c.diagnose.samplers));
  kv("window_fraction", double_repr(c.diagnose.window_fraction));
  return out;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write config: " + path.string());
  }
  out << serialize_config(config);
  if (!out) {
    throw IoError("short write: " + path.string());
  }
}

std::uint64_t config_hash(const RunConfig& config) {
  RunConfig canonical = config;
  canonical.output.dir = "-";
  return fnv1a64(serialize_config(canonical));
}

std::string config_hash_hex(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  return std::string(buf);
}

}  // namespace negcf
