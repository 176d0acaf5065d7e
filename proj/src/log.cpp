// Copyright 2026 The speechcmd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "speechcmd/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace speechcmd::log {

namespace {

std::atomic<Format> g_format{Format::kText};
std::atomic<Level> g_min_level{Level::kInfo};
std::mutex g_mutex;

const char* level_name(Level level) {
  switch (level) {
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
  }
  return "info";
}

}  // namespace

void set_format(Format format) { g_format = format; }
void set_min_level(Level level) { g_min_level = level; }

void emit(Level level, std::string_view event, std::string_view message,
          const nlohmann::ordered_json& fields) {
  if (level < g_min_level.load()) return;
  std::lock_guard lock(g_mutex);
  if (g_format.load() == Format::kJson) {
    nlohmann::ordered_json line;
    line["level"] = level_name(level);
    line["event"] = event;
    line["message"] = message;
    for (const auto& [k, v] : fields.items()) line[k] = v;
    std::cerr << line.dump() << '\n';
  } else {
    std::cerr << '[' << level_name(level) << "] " << message << '\n';
  }
}

}  // namespace speechcmd::log
