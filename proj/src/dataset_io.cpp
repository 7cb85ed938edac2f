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

#include "swit/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace swit {
namespace {

static_assert(std::endian::native == std::endian::little, "dataset IO assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, ErrorCode on_short, const char* what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw DatasetError(on_short, std::string("dataset: truncated while reading ") + what);
  return value;
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& dataset) {
  out.write(kDatasetMagic, sizeof(kDatasetMagic));
  put<std::uint32_t>(out, kDatasetVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.samples.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.num_antennas));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.num_subcarriers));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.spot_count));
  put<double>(out, dataset.norm.re);
  put<double>(out, dataset.norm.im);
  put<double>(out, dataset.norm.abs);
  std::vector<float> payload(2 * static_cast<std::size_t>(dataset.num_antennas) * dataset.num_subcarriers);
  for (const auto& s : dataset.samples) {
    if (s.channel.rows() != dataset.num_antennas || s.channel.cols() != dataset.num_subcarriers)
      throw ShapeMismatch("write_dataset: sample shape differs from dataset header");
    for (float v : s.position) put<float>(out, v);
    put<std::uint32_t>(out, s.spot_label);
    put<float>(out, s.pathloss_db);
    std::size_t k = 0;
    for (int a = 0; a < dataset.num_antennas; ++a)
      for (int n = 0; n < dataset.num_subcarriers; ++n) {
        payload[k++] = s.channel(a, n).real();
        payload[k++] = s.channel(a, n).imag();
      }
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(float)));
  }
  if (!out) throw Error(ErrorCode::kIo, "write_dataset: stream write failed");
}

Dataset read_dataset(std::istream& in) {
  char magic[sizeof(kDatasetMagic)];
  if (!in.read(magic, sizeof(magic))) throw DatasetError(ErrorCode::kDatasetTruncated, "dataset: truncated magic");
  if (std::memcmp(magic, kDatasetMagic, sizeof(magic)) != 0)
    throw DatasetError(ErrorCode::kDatasetFormat, "dataset: bad magic bytes");
  const auto version = get<std::uint32_t>(in, ErrorCode::kDatasetTruncated, "version");
  if (version != kDatasetVersion)
    throw DatasetError(ErrorCode::kDatasetVersion, "dataset: unsupported version " + std::to_string(version));
  const auto count = get<std::uint32_t>(in, ErrorCode::kDatasetTruncated, "header");
  const auto antennas = get<std::uint32_t>(in, ErrorCode::kDatasetTruncated, "header");
  const auto subcarriers = get<std::uint32_t>(in, ErrorCode::kDatasetTruncated, "header");
  const auto spots = get<std::uint32_t>(in, ErrorCode::kDatasetTruncated, "header");
  Dataset ds;
  ds.norm.re = get<double>(in, ErrorCode::kDatasetTruncated, "header");
  ds.norm.im = get<double>(in, ErrorCode::kDatasetTruncated, "header");
  ds.norm.abs = get<double>(in, ErrorCode::kDatasetTruncated, "header");
  if (count == 0 || antennas == 0 || subcarriers == 0 || spots == 0)
    throw DatasetError(ErrorCode::kDatasetHeader, "dataset: header has zero-sized dimension");
  if (antennas > (1u << 16) || subcarriers > (1u << 16))
    throw DatasetError(ErrorCode::kDatasetHeader, "dataset: header dimensions implausibly large");
  if (!(ds.norm.re > 0.0) || !(ds.norm.im > 0.0) || !(ds.norm.abs > 0.0))
    throw DatasetError(ErrorCode::kDatasetHeader, "dataset: normalization constants must be positive");
  ds.num_antennas = static_cast<int>(antennas);
  ds.num_subcarriers = static_cast<int>(subcarriers);
  ds.spot_count = static_cast<int>(spots);

  std::vector<float> payload(2 * static_cast<std::size_t>(antennas) * subcarriers);
  ds.samples.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    ChannelSample s;
    for (auto& v : s.position) v = get<float>(in, ErrorCode::kDatasetTruncated, "sample");
    s.spot_label = get<std::uint32_t>(in, ErrorCode::kDatasetTruncated, "sample");
    if (s.spot_label >= spots) throw DatasetError(ErrorCode::kDatasetHeader, "dataset: spot label out of range");
    s.pathloss_db = get<float>(in, ErrorCode::kDatasetTruncated, "sample");
    if (!in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(float))))
      throw DatasetError(ErrorCode::kDatasetTruncated, "dataset: truncated channel payload in sample " + std::to_string(i));
    s.channel.resize(antennas, subcarriers);
    std::size_t k = 0;
    for (std::uint32_t a = 0; a < antennas; ++a)
      for (std::uint32_t n = 0; n < subcarriers; ++n, k += 2) s.channel(a, n) = {payload[k], payload[k + 1]};
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "save_dataset: cannot open " + tmp.string());
    write_dataset(out, dataset);
  }
  std::filesystem::rename(tmp, path);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "load_dataset: cannot open " + path.string());
  return read_dataset(in);
}

bool same_persisted_content(const Dataset& a, const Dataset& b) {
  if (a.num_antennas != b.num_antennas || a.num_subcarriers != b.num_subcarriers || a.spot_count != b.spot_count ||
      a.samples.size() != b.samples.size())
    return false;
  if (a.norm.re != b.norm.re || a.norm.im != b.norm.im || a.norm.abs != b.norm.abs) return false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto& x = a.samples[i];
    const auto& y = b.samples[i];
    if (x.position != y.position || x.spot_label != y.spot_label || x.pathloss_db != y.pathloss_db) return false;
    if (x.channel != y.channel) return false;
  }
  return true;
}

}  // namespace swit
