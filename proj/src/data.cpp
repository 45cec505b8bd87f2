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

#include "negcf/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace negcf {

namespace {

std::vector<std::string> split_fields(const std::string& line,
                                      const std::string& delim) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(delim, pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + delim.size();
  }
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double_field(const std::string& field, int line_no,
                          const char* what) {
  const std::string t = trim(field);
  try {
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what +
                     " value '" + t + "'");
  }
}

std::int64_t parse_int_field(const std::string& field, int line_no,
                             const char* what) {
  const std::string t = trim(field);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what +
                     " value '" + t + "'");
  }
  return v;
}

struct ColumnLayout {
  int rating_col = -1;     // -1 when absent
  int timestamp_col = -1;  // -1 when absent
  int num_cols = 2;
};

ColumnLayout layout_from_field_count(std::size_t n, int line_no) {
  ColumnLayout layout;
  layout.num_cols = static_cast<int>(n);
  switch (n) {
    case 2:
      break;
    case 3:
      layout.rating_col = 2;
      break;
    case 4:
      layout.rating_col = 2;
      layout.timestamp_col = 3;
      break;
    default:
      throw ParseError("line " + std::to_string(line_no) + ": expected 2-4 " +
                       "columns (user, item, rating?, timestamp?), got " +
                       std::to_string(n));
  }
  return layout;
}

ColumnLayout layout_from_csv_header(const std::string& header, int line_no) {
  auto fields = split_fields(header, ",");
  for (auto& f : fields) f = trim(f);
  if (fields.size() < 2 || fields[0] != "user" || fields[1] != "item") {
    throw ParseError("line " + std::to_string(line_no) +
                     ": csv header must start with 'user,item'");
  }
  ColumnLayout layout;
  layout.num_cols = static_cast<int>(fields.size());
  for (std::size_t c = 2; c < fields.size(); ++c) {
    if (fields[c] == "rating") {
      layout.rating_col = static_cast<int>(c);
    } else if (fields[c] == "timestamp") {
      layout.timestamp_col = static_cast<int>(c);
    } else {
      throw ParseError("line " + std::to_string(line_no) +
                       ": unknown csv column '" + fields[c] + "'");
    }
  }
  return layout;
}

}  // namespace

bool InteractionDataset::has_positive(UserId u, ItemId i) const {
  if (u < 0 || u >= num_users) return false;
  return contains_item(user_positives[u], i);
}

bool contains_item(const std::vector<ItemId>& sorted_items, ItemId item) {
  return std::binary_search(sorted_items.begin(), sorted_items.end(), item);
}

FileFormat file_format_from_name(const std::string& name) {
  if (name == "movielens-dat") return FileFormat::kMovieLensDat;
  if (name == "movielens-tsv") return FileFormat::kMovieLensTsv;
  if (name == "csv") return FileFormat::kCsv;
  throw ConfigError("unknown dataset format '" + name + "'");
}

std::string file_format_name(FileFormat format) {
  switch (format) {
    case FileFormat::kMovieLensDat:
      return "movielens-dat";
    case FileFormat::kMovieLensTsv:
      return "movielens-tsv";
    case FileFormat::kCsv:
      return "csv";
  }
  return "csv";
}

InteractionDataset parse_interactions(const std::filesystem::path& path,
                                      FileFormat format,
                                      std::optional<double> rating_threshold) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open interaction file: " + path.string());
  }

  const std::string delim =
      format == FileFormat::kMovieLensDat
          ? "::"
          : (format == FileFormat::kMovieLensTsv ? "\t" : ",");

  std::unordered_map<std::string, UserId> user_ids;
  std::unordered_map<std::string, ItemId> item_ids;
  std::set<std::pair<UserId, ItemId>> seen;
  InteractionDataset ds;

  std::optional<ColumnLayout> layout;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    if (format == FileFormat::kCsv && !layout.has_value()) {
      layout = layout_from_csv_header(line, line_no);
      continue;
    }

    auto fields = split_fields(line, delim);
    if (!layout.has_value()) {
      layout = layout_from_field_count(fields.size(), line_no);
      if (rating_threshold.has_value() && layout->rating_col < 0) {
        throw ParseError("rating threshold given but format has no rating "
                         "column");
      }
    }
    if (static_cast<int>(fields.size()) != layout->num_cols) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(layout->num_cols) + " columns, got " +
                       std::to_string(fields.size()));
    }

    if (layout->rating_col >= 0) {
      double rating =
          parse_double_field(fields[layout->rating_col], line_no, "rating");
      if (rating_threshold.has_value() && rating < *rating_threshold) {
        continue;
      }
    } else if (rating_threshold.has_value()) {
      throw ParseError("rating threshold given but format has no rating "
                       "column");
    }

    std::int64_t timestamp = -1;
    if (layout->timestamp_col >= 0) {
      timestamp =
          parse_int_field(fields[layout->timestamp_col], line_no, "timestamp");
    }

    const std::string user_key = trim(fields[0]);
    const std::string item_key = trim(fields[1]);
    if (user_key.empty() || item_key.empty()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": empty user or item id");
    }

    auto [uit, user_inserted] =
        user_ids.try_emplace(user_key, static_cast<UserId>(user_ids.size()));
    auto [iit, item_inserted] =
        item_ids.try_emplace(item_key, static_cast<ItemId>(item_ids.size()));
    const UserId u = uit->second;
    const ItemId i = iit->second;

    if (!seen.insert({u, i}).second) continue;  // duplicate pair
    ds.interactions.push_back({u, i, timestamp});
  }

  if (ds.interactions.empty()) {
    throw ParseError("empty dataset: no interactions retained from " +
                     path.string());
  }

  ds.num_users = static_cast<UserId>(user_ids.size());
  ds.num_items = static_cast<ItemId>(item_ids.size());
  ds.user_positives.assign(ds.num_users, {});
  ds.item_popularity.assign(ds.num_items, 0);
  for (const auto& inter : ds.interactions) {
    ds.user_positives[inter.user].push_back(inter.item);
    ds.item_popularity[inter.item] += 1;
  }
  for (auto& items : ds.user_positives) {
    std::sort(items.begin(), items.end());
  }
  return ds;
}

InteractionDataset dataset_from_pairs(UserId num_users, ItemId num_items,
                                      const std::vector<UserItem>& pairs) {
  InteractionDataset ds;
  ds.num_users = num_users;
  ds.num_items = num_items;
  ds.user_positives.assign(num_users, {});
  ds.item_popularity.assign(num_items, 0);
  std::set<UserItem> seen;
  for (const auto& [u, i] : pairs) {
    if (u < 0 || u >= num_users || i < 0 || i >= num_items) {
      throw ContractError("pair (" + std::to_string(u) + ", " +
                          std::to_string(i) + ") outside dataset bounds");
    }
    if (!seen.insert({u, i}).second) continue;
    ds.interactions.push_back({u, i, -1});
    ds.user_positives[u].push_back(i);
    ds.item_popularity[i] += 1;
  }
  for (auto& items : ds.user_positives) {
    std::sort(items.begin(), items.end());
  }
  return ds;
}

SplitManifest split_dataset(const InteractionDataset& ds, double test_frac,
                            double val_frac_of_train, std::uint64_t seed) {
  if (!(test_frac > 0.0 && test_frac < 1.0)) {
    throw ContractError("test_frac must be in (0, 1)");
  }
  if (!(val_frac_of_train >= 0.0 && val_frac_of_train < 1.0)) {
    throw ContractError("val_frac_of_train must be in [0, 1)");
  }

  SplitManifest m;
  m.seed = seed;
  m.test_frac = test_frac;
  m.val_frac = val_frac_of_train;
  m.train_frac = 1.0 - test_frac;

  for (UserId u = 0; u < ds.num_users; ++u) {
    std::vector<ItemId> order = ds.user_positives[u];
    const std::size_t n = order.size();
    if (n == 0) continue;
    if (n == 1) {
      m.train.emplace_back(u, order[0]);
      continue;
    }
    Rng rng = stream_rng(seed, static_cast<std::uint64_t>(u));
    std::shuffle(order.begin(), order.end(), rng);

    std::size_t n_test = static_cast<std::size_t>(
        std::ceil(test_frac * static_cast<double>(n)));
    n_test = std::min(n_test, n - 1);  // always keep something trainable
    const std::size_t n_pool = n - n_test;
    std::size_t n_val = static_cast<std::size_t>(std::floor(
        val_frac_of_train * static_cast<double>(n_pool) + 0.5));
    n_val = std::min(n_val, n_pool - 1);

    for (std::size_t k = 0; k < n_pool - n_val; ++k) {
      m.train.emplace_back(u, order[k]);
    }
    for (std::size_t k = n_pool - n_val; k < n_pool; ++k) {
      m.val.emplace_back(u, order[k]);
    }
    for (std::size_t k = n_pool; k < n; ++k) {
      m.test.emplace_back(u, order[k]);
    }
  }
  return m;
}

namespace {

double read_double(const std::string& s, const char* what) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ManifestError(std::string("bad ") + what + " value '" + s + "'");
  }
  return v;
}

void write_section(std::ofstream& out, const char* name,
                   const std::vector<UserItem>& pairs) {
  out << "[" << name << "]\n";
  for (const auto& [u, i] : pairs) {
    out << u << " " << i << "\n";
  }
}

}  // namespace

void save_manifest(const SplitManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write manifest: " + path.string());
  }
  out << "negcf-manifest v1\n";
  out << "seed " << m.seed << "\n";
  out << "ratios " << double_repr(m.train_frac) << " "
      << double_repr(m.test_frac) << " " << double_repr(m.val_frac) << "\n";
  out << "counts " << m.train.size() << " " << m.val.size() << " "
      << m.test.size() << "\n";
  write_section(out, "train", m.train);
  write_section(out, "val", m.val);
  write_section(out, "test", m.test);
  if (!out) {
    throw IoError("error while writing manifest: " + path.string());
  }
}

SplitManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open manifest: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || trim(line) != "negcf-manifest v1") {
    throw ManifestError("missing or unsupported manifest header in " +
                        path.string());
  }

  SplitManifest m;
  std::size_t counts[3] = {0, 0, 0};
  bool have_seed = false, have_ratios = false, have_counts = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '[') break;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "seed") {
      if (!(ss >> m.seed)) throw ManifestError("bad seed line");
      have_seed = true;
    } else if (key == "ratios") {
      std::string a, b, c;
      if (!(ss >> a >> b >> c)) throw ManifestError("bad ratios line");
      m.train_frac = read_double(a, "train_frac");
      m.test_frac = read_double(b, "test_frac");
      m.val_frac = read_double(c, "val_frac");
      have_ratios = true;
    } else if (key == "counts") {
      if (!(ss >> counts[0] >> counts[1] >> counts[2])) {
        throw ManifestError("bad counts line");
      }
      have_counts = true;
    } else {
      throw ManifestError("unknown manifest field '" + key + "'");
    }
  }
  if (!have_seed || !have_ratios || !have_counts) {
    throw ManifestError("manifest header incomplete (seed/ratios/counts)");
  }

  std::vector<UserItem>* section = nullptr;
  auto pick_section = [&](const std::string& header) {
    if (header == "[train]") return &m.train;
    if (header == "[val]") return &m.val;
    if (header == "[test]") return &m.test;
    throw ManifestError("unknown manifest section " + header);
  };
  section = pick_section(trim(line));
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '[') {
      section = pick_section(line);
      continue;
    }
    std::istringstream ss(line);
    long long u = 0, i = 0;
    if (!(ss >> u >> i)) {
      throw ManifestError("bad manifest pair line '" + line + "'");
    }
    section->emplace_back(static_cast<UserId>(u), static_cast<ItemId>(i));
  }

  if (m.train.size() != counts[0] || m.val.size() != counts[1] ||
      m.test.size() != counts[2]) {
    throw ManifestError("manifest section sizes disagree with counts header");
  }
  return m;
}

void validate_manifest(const SplitManifest& m, const InteractionDataset& ds) {
  auto check = [&](const std::vector<UserItem>& pairs, const char* name) {
    for (const auto& [u, i] : pairs) {
      if (u < 0 || u >= ds.num_users || i < 0 || i >= ds.num_items) {
        throw ManifestError(std::string("manifest ") + name + " pair (" +
                            std::to_string(u) + ", " + std::to_string(i) +
                            ") outside dataset bounds");
      }
    }
  };
  check(m.train, "train");
  check(m.val, "val");
  check(m.test, "test");
}

std::vector<std::vector<ItemId>> positives_by_user(
    UserId num_users, const std::vector<UserItem>& pairs) {
  std::vector<std::vector<ItemId>> by_user(num_users);
  for (const auto& [u, i] : pairs) {
    if (u < 0 || u >= num_users) {
      throw ContractError("user id " + std::to_string(u) + " out of range");
    }
    by_user[u].push_back(i);
  }
  for (auto& items : by_user) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
  }
  return by_user;
}

}  // namespace negcf
