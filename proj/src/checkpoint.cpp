/*
 * Copyright 2026 The sessrec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "sessrec/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sessrec {

namespace {

constexpr char kMagic[4] = {'S', 'R', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return value;
}

}  // namespace

void save_checkpoint(const std::string& path, std::uint64_t config_hash,
                     const std::vector<ParamBlock>& blocks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, config_hash);
  write_pod(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    write_pod(out, static_cast<std::uint32_t>(b.name.size()));
    out.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    write_pod(out, static_cast<std::uint64_t>(b.mat->rows()));
    write_pod(out, static_cast<std::uint64_t>(b.mat->cols()));
    out.write(reinterpret_cast<const char*>(b.mat->data()),
              static_cast<std::streamsize>(b.mat->size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

std::uint64_t load_checkpoint(const std::string& path,
                              const std::vector<ParamBlock>& blocks) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  }
  const auto hash = read_pod<std::uint64_t>(in);
  const auto n_blocks = read_pod<std::uint32_t>(in);
  if (n_blocks != blocks.size()) {
    throw std::runtime_error("checkpoint: block count mismatch");
  }
  for (const auto& b : blocks) {
    const auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rows = read_pod<std::uint64_t>(in);
    const auto cols = read_pod<std::uint64_t>(in);
    if (!in || name != b.name ||
        rows != static_cast<std::uint64_t>(b.mat->rows()) ||
        cols != static_cast<std::uint64_t>(b.mat->cols())) {
      throw std::runtime_error("checkpoint: block '" + b.name +
                               "' does not match file layout");
    }
    in.read(reinterpret_cast<char*>(b.mat->data()),
            static_cast<std::streamsize>(b.mat->size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated block data");
  }
  return hash;
}

}  // namespace sessrec
