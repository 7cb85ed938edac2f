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

#include <filesystem>
#include <iosfwd>

#include "swit/channel_sim.hpp"
#include "swit/error.hpp"

namespace swit {

/// Binary dataset container.
///
/// Layout (little-endian):
///   char[8]  magic "SWITDS1\0"
///   u32      version (1)
///   u32      sample count
///   u32      N_r
///   u32      N_c'
///   u32      spot count
///   f64      normalization re, im, abs
///   per sample: f32 position[3], u32 spot, f32 pathloss_db, f32 channel[2*N_r*N_c']
///
/// The channel is interleaved re/im in antenna-major order (entry (a, n) at a*N_c' + n).
inline constexpr char kDatasetMagic[8] = {'S', 'W', 'I', 'T', 'D', 'S', '1', '\0'};
inline constexpr std::uint32_t kDatasetVersion = 1;

class DatasetError : public Error {
 public:
  using Error::Error;
};

void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);

void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

/// Equality over the persisted fields.
bool same_persisted_content(const Dataset& a, const Dataset& b);

}  // namespace swit
