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

#include "negcf/core.hpp"

#include <charconv>
#include <cstdlib>
#include <iostream>

namespace negcf {

std::string double_repr(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("NEGCF_LOG");
    if (env == nullptr) return LogLevel::kInfo;
    std::string v(env);
    if (v == "quiet") return LogLevel::kQuiet;
    if (v == "debug") return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) {
    std::cerr << "[negcf] " << msg << "\n";
  }
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::kDebug) {
    std::cerr << "[negcf:debug] " << msg << "\n";
  }
}

}  // namespace negcf
