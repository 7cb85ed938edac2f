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
#include <string>
#include <vector>

#include "swit/channel_sim.hpp"
#include "swit/eval_harness.hpp"
#include "swit/swit_trainer.hpp"

namespace swit {

/// Everything a CLI run needs. `seed` is the root of every random stream and
/// overrides the per-section seeds when the config is applied.
struct RunConfig {
  ScenarioConfig scenario;
  TrainerConfig train;
  EvalConfig eval;
  std::uint64_t seed = 1;
  std::string out_dir = "runs";

  /// Copies the root seed into the section configs.
  void apply_seed();
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Keys are section-prefixed
/// (scenario., augment., encoder., projector., ssl., train., eval.). Unknown or
/// repeated keys and malformed values throw ErrorCode::kConfig.
RunConfig parse_run_config(std::istream& in);
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Sets one key as if it appeared in a config file; throws kConfig like the parser.
void set_run_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Every key in a fixed order; doubles use 17 significant digits.
std::string serialize_run_config(const RunConfig& config);

/// All recognised keys in serialization order.
std::vector<std::string> run_config_keys();

}  // namespace swit
