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

#pragma once

#include <string_view>

#include "json.hpp"

namespace speechcmd::log {

enum class Level { kInfo, kWarn, kError };
enum class Format { kText, kJson };

// Process-wide sink configuration; set once at startup.
void set_format(Format format);
void set_min_level(Level level);

// Text mode writes "[level] message" to stderr. JSON mode writes one object
// per line: {"level", "event", "message", ...fields}.
void emit(Level level, std::string_view event, std::string_view message,
          const nlohmann::ordered_json& fields = nlohmann::ordered_json::object());

inline void info(std::string_view event, std::string_view message,
                 const nlohmann::ordered_json& fields = nlohmann::ordered_json::object()) {
  emit(Level::kInfo, event, message, fields);
}
inline void warn(std::string_view event, std::string_view message,
                 const nlohmann::ordered_json& fields = nlohmann::ordered_json::object()) {
  emit(Level::kWarn, event, message, fields);
}
inline void error(std::string_view event, std::string_view message,
                  const nlohmann::ordered_json& fields = nlohmann::ordered_json::object()) {
  emit(Level::kError, event, message, fields);
}

}  // namespace speechcmd::log
