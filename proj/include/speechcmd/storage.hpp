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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "speechcmd/dsp.hpp"
#include "speechcmd/grid.hpp"

namespace speechcmd {

/// Backbone embeddings, one row per manifest record, row-major float32.
struct EmbeddingMatrix {
  std::uint32_t n_rows = 0;
  std::uint32_t dim = 0;
  std::vector<float> values;

  bool operator==(const EmbeddingMatrix&) const = default;
};

// EMB1 layout: "EMB1", u32 n_rows, u32 dim, float32 body; all little-endian.
// Non-finite values are rejected with InvalidInput before anything is written.
void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

/// Decoded FPZ1 file: n_patches patches of n_frames x n_bands.
struct PatchFile {
  std::uint32_t n_patches = 0;
  std::uint32_t n_frames = 0;
  std::uint32_t n_bands = 0;
  std::vector<float> values;

  std::size_t patch_size() const {
    return static_cast<std::size_t>(n_frames) * n_bands;
  }
  bool operator==(const PatchFile&) const = default;
};

// FPZ1 layout: "FPZ1", u32 n_patches, u32 n_frames, u32 n_bands, float32 body.
void write_patches(const std::vector<FeaturePatch>& patches, const std::filesystem::path& path);
void write_patches(const PatchFile& file, const std::filesystem::path& path);
PatchFile read_patches(const std::filesystem::path& path);

// Low-level helpers shared by the binary formats.
namespace binio {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v);
void put_f32(std::vector<unsigned char>& out, float v);
std::uint32_t get_u32(const unsigned char* p);
float get_f32(const unsigned char* p);

std::vector<unsigned char> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);

}  // namespace binio

}  // namespace speechcmd
