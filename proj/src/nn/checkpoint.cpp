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

#include "swit/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace swit::nn {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::kCheckpoint, "checkpoint: " + what); }

template <typename U>
void put(std::ostream& out, U value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(U));
}

template <typename U>
U get(std::istream& in) {
  U value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(U))) fail("truncated");
  return value;
}

void put_name(std::ostream& out, const std::string& name) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
}

std::string get_name(std::istream& in) {
  const auto len = get<std::uint32_t>(in);
  if (len > 4096) fail("implausible name length");
  std::string name(len, '\0');
  if (!in.read(name.data(), len)) fail("truncated name");
  return name;
}

}  // namespace

const Matrix<float>& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors)
    if (n == name) return m;
  fail("missing tensor " + name);
}

bool Checkpoint::has_tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.first == name) return true;
  return false;
}

std::uint64_t Checkpoint::counter(const std::string& name) const {
  for (const auto& [n, v] : counters)
    if (n == name) return v;
  fail("missing counter " + name);
}

bool Checkpoint::has_counter(const std::string& name) const {
  for (const auto& c : counters)
    if (c.first == name) return true;
  return false;
}

void Checkpoint::set_counter(const std::string& name, std::uint64_t value) {
  for (auto& c : counters)
    if (c.first == name) {
      c.second = value;
      return;
    }
  counters.emplace_back(name, value);
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, m] : ckpt.tensors) {
    put_name(out, name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.counters.size()));
  for (const auto& [name, v] : ckpt.counters) {
    put_name(out, name);
    put<std::uint64_t>(out, v);
  }
  if (!out) throw Error(ErrorCode::kIo, "checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic))) fail("truncated magic");
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) fail("bad magic bytes");
  if (get<std::uint32_t>(in) != kCheckpointVersion) fail("unsupported version");
  Checkpoint ckpt;
  const auto n = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = get_name(in);
    const auto rows = get<std::uint32_t>(in);
    const auto cols = get<std::uint32_t>(in);
    if (static_cast<std::uint64_t>(rows) * cols > (1ull << 31)) fail("implausible tensor size");
    Matrix<float> m(rows, cols);
    if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float))))
      fail("truncated tensor " + name);
    ckpt.tensors.emplace_back(std::move(name), std::move(m));
  }
  const auto c = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < c; ++i) {
    std::string name = get_name(in);
    ckpt.counters.emplace_back(std::move(name), get<std::uint64_t>(in));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "checkpoint: cannot open " + tmp.string());
    write_checkpoint(out, ckpt);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

template <typename T>
void append_store(Checkpoint& ckpt, const std::string& prefix, const ParamStore<T>& store, bool with_moments) {
  for (const auto& p : store.entries()) ckpt.tensors.emplace_back(prefix + p.name, p.value.template cast<float>());
  if (!with_moments) return;
  for (const auto& p : store.entries()) {
    ckpt.tensors.emplace_back(prefix + "adam.m/" + p.name, p.m.template cast<float>());
    ckpt.tensors.emplace_back(prefix + "adam.v/" + p.name, p.v.template cast<float>());
  }
}

template <typename T>
void restore_store(const Checkpoint& ckpt, const std::string& prefix, ParamStore<T>& store) {
  for (auto& p : store.entries()) {
    const auto& m = ckpt.tensor(prefix + p.name);
    if (m.rows() != p.value.rows() || m.cols() != p.value.cols())
      throw ShapeMismatch("checkpoint: shape mismatch for " + prefix + p.name);
    p.value = m.template cast<T>();
    if (ckpt.has_tensor(prefix + "adam.m/" + p.name)) {
      p.m = ckpt.tensor(prefix + "adam.m/" + p.name).template cast<T>();
      p.v = ckpt.tensor(prefix + "adam.v/" + p.name).template cast<T>();
    }
  }
}

template void append_store(Checkpoint&, const std::string&, const ParamStore<float>&, bool);
template void append_store(Checkpoint&, const std::string&, const ParamStore<double>&, bool);
template void restore_store(const Checkpoint&, const std::string&, ParamStore<float>&);
template void restore_store(const Checkpoint&, const std::string&, ParamStore<double>&);

}  // namespace swit::nn
