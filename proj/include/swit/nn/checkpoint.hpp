// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The SWiT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "swit/nn/params.hpp"

namespace swit::nn {

/// Checkpoint container.
///
/// Layout (little-endian):
///   char[8] magic "SWITCK1\0"
///   u32     version (1)
///   u32     tensor count; per tensor: u32 name length, name bytes, u32 rows, u32 cols, f32 data (row-major)
///   u32     counter count; per counter: u32 name length, name bytes, u64 value
inline constexpr char kCheckpointMagic[8] = {'S', 'W', 'I', 'T', 'C', 'K', '1', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::vector<std::pair<std::string, Matrix<float>>> tensors;
  std::vector<std::pair<std::string, std::uint64_t>> counters;

  const Matrix<float>& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
  std::uint64_t counter(const std::string& name) const;
  bool has_counter(const std::string& name) const;
  void set_counter(const std::string& name, std::uint64_t value);
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
/// Written to a temporary file and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Appends every parameter as `prefix + name`, plus AdamW moments as
/// `prefix + "adam.m/" + name` and `prefix + "adam.v/" + name` when requested.
template <typename T>
void append_store(Checkpoint& ckpt, const std::string& prefix, const ParamStore<T>& store, bool with_moments);

/// Restores values (and moments when present) for every parameter of `store`.
template <typename T>
void restore_store(const Checkpoint& ckpt, const std::string& prefix, ParamStore<T>& store);

}  // namespace swit::nn
