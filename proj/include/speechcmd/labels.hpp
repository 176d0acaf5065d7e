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

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace speechcmd {

inline constexpr int kNumClasses = 12;
inline constexpr int kUnknownClass = 10;
inline constexpr int kBackgroundClass = 11;
inline constexpr int kNumCommands = 10;

// Index order is part of every file format: commands 0..9, unknown, background.
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "yes", "no", "up", "down", "left", "right",
    "on",  "off", "stop", "go", "unknown", "background"};

inline constexpr std::string_view kBackgroundNoiseDir = "_background_noise_";

inline std::string_view class_name(int index) { return kClassNames.at(index); }

inline std::optional<int> class_index(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i)
    if (kClassNames[i] == name) return i;
  return std::nullopt;
}

inline bool is_command(int index) { return index >= 0 && index < kNumCommands; }

}  // namespace speechcmd
