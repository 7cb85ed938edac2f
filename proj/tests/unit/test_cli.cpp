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

#include <doctest.h>

#include <string>

#include "swit/error.hpp"
#include "swit/run_config.hpp"

using namespace swit;

namespace {

ErrorCode parse_error(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a config error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("defaults reproduce the documented values") {
    const RunConfig c = parse_run_config(std::string());
    CHECK(c.train.augment.global1.crop_fraction == 0.9);
    CHECK(c.train.augment.global2.crop_fraction == 0.8);
    CHECK(c.train.augment.local.crop_fraction == 0.1);
    CHECK(c.train.augment.global1.target_length == 36);
    CHECK(c.train.augment.local.target_length == 16);
    CHECK(c.train.augment.num_local == 8);
    CHECK(c.train.augment.global2.p_rfc == 0.1);
    CHECK(c.train.augment.global2.p_rsc == 0.2);
    CHECK(c.train.augment.global1.p_rfc == 0.0);
    CHECK(c.train.base_lr == 1.5e-4);
    CHECK(c.train.batch_size == 128);
    CHECK(c.train.epochs == 100);
    CHECK(c.train.warmup_epochs == 10);
    CHECK(c.train.wd_start == 0.04);
    CHECK(c.train.wd_end == 0.4);
    CHECK(c.train.clip_norm == 3.0);
    CHECK(c.train.kappa_base == 0.996);
    CHECK(c.train.ssl.chi_online == 0.1);
    CHECK(c.train.ssl.chi_target == 0.04);
    CHECK(c.train.ssl.beta == 0.1);
    CHECK(c.train.ssl.neighbor_window == 6);
    CHECK(c.train.ssl.neighbor_topk == 3);
    CHECK(c.train.model.encoder.embed_dim == 64);
    CHECK(c.scenario.num_users == 4096);
    CHECK(c.scenario.num_subcarriers == 32);
    CHECK(c.scenario.num_antennas() == 16);
    CHECK(c.scenario.spot_count() == 4);
    CHECK(c.eval.lr == 3e-4);
    CHECK(c.eval.linear_epochs == 500);
    CHECK(c.eval.linear_batch == 128);
    CHECK(c.eval.finetune_batch == 512);
  }

  TEST_CASE("parse then serialize is a fixed point") {
    const std::string text =
        "# desk run\n"
        "seed = 7\n"
        "scenario.rrh_positions = 10,-1,3; 0,0,2.5\n"
        "scenario.snr_db = 17.3\n"
        "augment.global2.p_rfc = 0.15   # tweak\n"
        "train.base_lr = 0.00012345678901234567\n"
        "eval.task = pathloss\n"
        "encoder.final_norm = false\n"
        "out_dir = runs/a b\n";
    const RunConfig a = parse_run_config(text);
    CHECK(a.seed == 7);
    CHECK(a.train.seed == 7);
    CHECK(a.scenario.seed == 7);
    CHECK(a.eval.seed == 7);
    CHECK(a.scenario.rrh_positions.size() == 2);
    CHECK(a.scenario.rrh_positions[1].z() == 2.5);
    CHECK(a.eval.task == EvalTask::kPathloss);
    CHECK_FALSE(a.train.model.encoder.final_norm);
    CHECK(a.out_dir == "runs/a b");
    const std::string s1 = serialize_run_config(a);
    const RunConfig b = parse_run_config(s1);
    const std::string s2 = serialize_run_config(b);
    CHECK(s1 == s2);
    CHECK(b.train.base_lr == a.train.base_lr);
    CHECK(b.scenario.snr_db == a.scenario.snr_db);
    CHECK(serialize_run_config(parse_run_config(serialize_run_config(RunConfig{}))) == serialize_run_config(RunConfig{}));
  }

  TEST_CASE("every key appears once in the serialization") {
    const auto keys = run_config_keys();
    const std::string s = serialize_run_config(RunConfig{});
    const std::string padded = "\n" + s;
    for (const auto& k : keys) CHECK(padded.find("\n" + k + " = ") != std::string::npos);
  }

  TEST_CASE("malformed configs are rejected") {
    CHECK(parse_error("train.nonsense = 1\n") == ErrorCode::kConfig);
    CHECK(parse_error("seed = 1\nseed = 2\n") == ErrorCode::kConfig);
    CHECK(parse_error("train.epochs = ten\n") == ErrorCode::kConfig);
    CHECK(parse_error("train.epochs = 10.5\n") == ErrorCode::kConfig);
    CHECK(parse_error("train.base_lr = nan\n") == ErrorCode::kConfig);
    CHECK(parse_error("scenario.region_lo = 1,2\n") == ErrorCode::kConfig);
    CHECK(parse_error("just words\n") == ErrorCode::kConfig);
    CHECK(parse_error("eval.mode = sideways\n") == ErrorCode::kConfig);
    CHECK(parse_error("encoder.final_norm = maybe\n") == ErrorCode::kConfig);
  }

  TEST_CASE("validation reports config errors") {
    RunConfig c = parse_run_config("augment.local.p_rsf = 1.5\n");
    try {
      c.validate();
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConfig);
    }
  }

  TEST_CASE("single-key overrides") {
    RunConfig c;
    set_run_config_value(c, "train.epochs", "3");
    set_run_config_value(c, "seed", "9");
    CHECK(c.train.epochs == 3);
    CHECK(c.train.seed == 9);
    CHECK_THROWS_AS(set_run_config_value(c, "bogus", "1"), Error);
  }

  TEST_CASE("missing config file") {
    try {
      load_run_config("/nonexistent/swit.cfg");
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kIo);
    }
  }
}
