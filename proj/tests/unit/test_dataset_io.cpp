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

#include <cmath>
#include <sstream>
#include <string>

#include "swit/channel_sim.hpp"
#include "swit/dataset_io.hpp"

using namespace swit;

namespace {

Dataset tiny() {
  ScenarioConfig c;
  c.num_users = 6;
  c.num_scatterers = 2;
  c.num_subcarriers = 4;
  c.array_rows = 1;
  c.array_cols = 2;
  c.seed = 3;
  return generate_dataset(c);
}

std::string bytes_of(const Dataset& d) {
  std::ostringstream out(std::ios::binary);
  write_dataset(out, d);
  return out.str();
}

ErrorCode load_error(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  try {
    read_dataset(in);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a load error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_SUITE("dataset_io") {
  TEST_CASE("round trip is exact") {
    const Dataset d = tiny();
    const std::string bytes = bytes_of(d);
    std::istringstream in(bytes, std::ios::binary);
    const Dataset back = read_dataset(in);
    CHECK(same_persisted_content(d, back));
    CHECK(back.norm.re == d.norm.re);
    CHECK(back.samples[5].channel == d.samples[5].channel);
    CHECK(back.samples[2].pathloss_db == d.samples[2].pathloss_db);
    CHECK(bytes_of(back) == bytes);
  }

  TEST_CASE("header layout") {
    const std::string bytes = bytes_of(tiny());
    CHECK(bytes.compare(0, 8, std::string(kDatasetMagic, 8)) == 0);
    const std::size_t header = 8 + 5 * 4 + 3 * 8;
    const std::size_t per_sample = 3 * 4 + 4 + 4 + 2 * 2 * 4 * 4;
    CHECK(bytes.size() == header + 6 * per_sample);
  }

  TEST_CASE("malformed inputs map to distinct errors") {
    const std::string good = bytes_of(tiny());

    std::string magic = good;
    magic[0] = 'X';
    CHECK(load_error(magic) == ErrorCode::kDatasetFormat);

    std::string version = good;
    version[8] = 7;
    CHECK(load_error(version) == ErrorCode::kDatasetVersion);

    CHECK(load_error(good.substr(0, good.size() - 3)) == ErrorCode::kDatasetTruncated);
    CHECK(load_error(good.substr(0, 10)) != ErrorCode::kDatasetVersion);

    std::string zero_antennas = good;
    for (int i = 0; i < 4; ++i) zero_antennas[16 + i] = 0;
    CHECK(load_error(zero_antennas) == ErrorCode::kDatasetHeader);
  }

  TEST_CASE("missing file is an io error") {
    try {
      load_dataset("/nonexistent/swit/none.bin");
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kIo);
    }
  }
}
