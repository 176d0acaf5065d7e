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

#include "speechcmd/storage.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "speechcmd/errors.hpp"

namespace speechcmd {

namespace binio {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f32(std::vector<unsigned char>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IOError("write failed for " + path.string());
}

}  // namespace binio

namespace {

void check_magic(const std::vector<unsigned char>& bytes, const char* magic) {
  if (bytes.size() < 4)
    throw FormatError("file too short for magic \"" + std::string(magic) + "\"", bytes.size());
  if (std::memcmp(bytes.data(), magic, 4) != 0)
    throw FormatError("bad magic \"" + std::string(bytes.begin(), bytes.begin() + 4) +
                          "\", expected \"" + magic + "\"",
                      0);
}

void check_length(std::size_t expected, std::size_t actual) {
  if (expected != actual)
    throw FormatError("expected " + std::to_string(expected) + " bytes, file has " +
                          std::to_string(actual),
                      std::min(expected, actual));
}

void require_finite(const std::vector<float>& values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw InvalidInput(std::string(what) + ": non-finite value at index " + std::to_string(i));
}

}  // namespace

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  if (matrix.values.size() != static_cast<std::size_t>(matrix.n_rows) * matrix.dim)
    throw InvalidInput("write_embeddings: value count does not match n_rows x dim");
  require_finite(matrix.values, "write_embeddings");
  std::vector<unsigned char> out;
  out.reserve(12 + 4 * matrix.values.size());
  out.insert(out.end(), {'E', 'M', 'B', '1'});
  binio::put_u32(out, matrix.n_rows);
  binio::put_u32(out, matrix.dim);
  for (float v : matrix.values) binio::put_f32(out, v);
  binio::write_file(path, out);
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  const auto bytes = binio::read_file(path);
  check_magic(bytes, "EMB1");
  if (bytes.size() < 12) throw FormatError("truncated EMB1 header", bytes.size());
  EmbeddingMatrix m;
  m.n_rows = binio::get_u32(bytes.data() + 4);
  m.dim = binio::get_u32(bytes.data() + 8);
  const std::size_t count = static_cast<std::size_t>(m.n_rows) * m.dim;
  check_length(12 + 4 * count, bytes.size());
  m.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) m.values[i] = binio::get_f32(bytes.data() + 12 + 4 * i);
  return m;
}

void write_patches(const PatchFile& file, const std::filesystem::path& path) {
  if (file.values.size() != file.patch_size() * file.n_patches)
    throw InvalidInput("write_patches: value count does not match header");
  require_finite(file.values, "write_patches");
  std::vector<unsigned char> out;
  out.reserve(16 + 4 * file.values.size());
  out.insert(out.end(), {'F', 'P', 'Z', '1'});
  binio::put_u32(out, file.n_patches);
  binio::put_u32(out, file.n_frames);
  binio::put_u32(out, file.n_bands);
  for (float v : file.values) binio::put_f32(out, v);
  binio::write_file(path, out);
}

void write_patches(const std::vector<FeaturePatch>& patches, const std::filesystem::path& path) {
  PatchFile file;
  file.n_patches = static_cast<std::uint32_t>(patches.size());
  if (!patches.empty()) {
    file.n_frames = static_cast<std::uint32_t>(patches.front().values.rows());
    file.n_bands = static_cast<std::uint32_t>(patches.front().values.cols());
  }
  file.values.reserve(file.patch_size() * patches.size());
  for (const auto& p : patches) {
    if (p.values.rows() != file.n_frames || p.values.cols() != file.n_bands)
      throw InvalidInput("write_patches: patch shapes differ");
    file.values.insert(file.values.end(), p.values.data().begin(), p.values.data().end());
  }
  write_patches(file, path);
}

PatchFile read_patches(const std::filesystem::path& path) {
  const auto bytes = binio::read_file(path);
  check_magic(bytes, "FPZ1");
  if (bytes.size() < 16) throw FormatError("truncated FPZ1 header", bytes.size());
  PatchFile f;
  f.n_patches = binio::get_u32(bytes.data() + 4);
  f.n_frames = binio::get_u32(bytes.data() + 8);
  f.n_bands = binio::get_u32(bytes.data() + 12);
  const std::size_t count = f.patch_size() * f.n_patches;
  check_length(16 + 4 * count, bytes.size());
  f.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) f.values[i] = binio::get_f32(bytes.data() + 16 + 4 * i);
  return f;
}

}  // namespace speechcmd
