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

#include "swit/wit_encoder.hpp"

#include <bit>
#include <cmath>
#include <vector>

namespace swit {

void EncoderConfig::validate() const {
  if (token_width < 1 || embed_dim < 1 || num_blocks < 0 || num_heads < 1 || mlp_ratio < 1)
    throw InvalidArgument("encoder: dimensions must be positive");
  if (embed_dim % num_heads != 0) throw InvalidArgument("encoder: embed_dim must be divisible by num_heads");
  if (max_positions < 2) throw InvalidArgument("encoder: max_positions must be >= 2");
  if (!(ln_eps > 0.0)) throw InvalidArgument("encoder: ln_eps must be > 0");
}

template <typename T>
void init_block(ParamStore<T>& store, const std::string& prefix, int dim, int hidden, Rng& rng) {
  const double sd = 1.0 / std::sqrt(static_cast<double>(dim));
  store.add_normal(prefix + "wq", dim, dim, sd, rng);
  store.add_normal(prefix + "wk", dim, dim, sd, rng);
  store.add_normal(prefix + "wv", dim, dim, sd, rng);
  store.add_normal(prefix + "wo", dim, dim, sd, rng);
  store.add_normal(prefix + "mlp.w1", dim, hidden, sd, rng);
  store.add_zeros(prefix + "mlp.b1", 1, hidden);
  store.add_normal(prefix + "mlp.w2", hidden, dim, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  store.add_zeros(prefix + "mlp.b2", 1, dim);
}

template <typename T>
void init_encoder(ParamStore<T>& store, const EncoderConfig& config, Rng& rng, const std::string& prefix) {
  config.validate();
  const int d = config.embed_dim;
  store.add_normal(prefix + "embed", config.token_width, d, 1.0 / std::sqrt(static_cast<double>(d)), rng);
  store.add_normal(prefix + "pos", config.max_positions, d, 0.02, rng, false);
  store.add_normal(prefix + "lid", 1, d, 0.02, rng, false);
  for (int b = 0; b < config.num_blocks; ++b)
    init_block(store, prefix + "block" + std::to_string(b) + ".", d, config.mlp_hidden(), rng);
}

template <typename T>
Var<T> attention_coefficients(const Var<T>& normed, const Var<T>& wq, const Var<T>& wk) {
  const Var<T> q = nn::matmul(normed, wq);
  const Var<T> k = nn::matmul(normed, wk);
  return nn::scale(nn::matmul(q, nn::transpose(k)), static_cast<T>(1.0 / std::sqrt(static_cast<double>(wq.cols()))));
}

template <typename T>
Var<T> self_attention(const Var<T>& normed, const Var<T>& wq, const Var<T>& wk, const Var<T>& wv, Eigen::Index num_seqs,
                      Eigen::Index seq_len, int heads) {
  const Var<T> q = nn::matmul(normed, wq);
  const Var<T> k = nn::matmul(normed, wk);
  const Var<T> v = nn::matmul(normed, wv);
  return nn::attention(q, k, v, num_seqs, seq_len, seq_len, heads);
}

template <typename T>
Var<T> transformer_block(const Bound<T>& params, const std::string& prefix, const Var<T>& x, Eigen::Index num_seqs,
                         Eigen::Index seq_len, int heads, T ln_gain, T ln_eps) {
  const Var<T> h = nn::layer_norm_rows(x, ln_gain, ln_eps);
  const Var<T> attended =
      self_attention(h, params[prefix + "wq"], params[prefix + "wk"], params[prefix + "wv"], num_seqs, seq_len, heads);
  const Var<T> x1 = nn::add(x, nn::matmul(attended, params[prefix + "wo"]));
  const Var<T> h2 = nn::layer_norm_rows(x1, ln_gain, ln_eps);
  const Var<T> hidden = nn::gelu(nn::linear(h2, params[prefix + "mlp.w1"], params[prefix + "mlp.b1"]));
  return nn::add(x1, nn::linear(hidden, params[prefix + "mlp.w2"], params[prefix + "mlp.b2"]));
}

template <typename T>
Var<T> embed_tokens(Graph<T>& graph, const Bound<T>& params, const EncoderConfig& config, const Matrix<T>& tokens,
                    Eigen::Index num_seqs, const std::string& prefix) {
  if (tokens.cols() != config.token_width)
    throw ShapeMismatch("embed_tokens: token width " + std::to_string(tokens.cols()) + " does not match encoder " +
                          std::to_string(config.token_width));
  if (num_seqs < 1 || tokens.rows() % num_seqs != 0)
    throw ShapeMismatch("embed_tokens: token rows not divisible by sequence count");
  const Eigen::Index len = tokens.rows() / num_seqs;
  if (len + 1 > config.max_positions) throw InvalidArgument("embed_tokens: sequence longer than positional table");
  const Var<T> embedded = nn::matmul(graph.constant(tokens), params[prefix + "embed"]);
  const Var<T> positioned = nn::add_tiled(embedded, nn::slice_rows(params[prefix + "pos"], 1, len), num_seqs);
  return nn::prepend_per_seq(params[prefix + "lid"], positioned, num_seqs);
}

template <typename T>
Var<T> encode(Graph<T>& graph, const Bound<T>& params, const EncoderConfig& config, const Matrix<T>& tokens,
              Eigen::Index num_seqs, const std::string& prefix) {
  Var<T> x = embed_tokens(graph, params, config, tokens, num_seqs, prefix);
  const Eigen::Index seq_len = x.rows() / num_seqs;
  const T gain = static_cast<T>(config.ln_gain);
  const T eps = static_cast<T>(config.ln_eps);
  for (int b = 0; b < config.num_blocks; ++b)
    x = transformer_block(params, prefix + "block" + std::to_string(b) + ".", x, num_seqs, seq_len, config.num_heads,
                          gain, eps);
  if (config.final_norm) x = nn::layer_norm_rows(x, gain, eps);
  return x;
}

template <typename T>
Var<T> lid_rows(const Var<T>& encoded, Eigen::Index num_seqs) {
  const Eigen::Index len = encoded.rows() / num_seqs;
  std::vector<int> idx(static_cast<std::size_t>(num_seqs));
  for (Eigen::Index s = 0; s < num_seqs; ++s) idx[static_cast<std::size_t>(s)] = static_cast<int>(s * len);
  return nn::gather_rows(encoded, std::span<const int>(idx));
}

template <typename T>
void init_head(ParamStore<T>& store, const HeadConfig& config, Rng& rng, const std::string& prefix) {
  if (config.in_dim < 1 || config.out_dim < 1 || config.hidden < 0) throw InvalidArgument("head: invalid dimensions");
  if (config.hidden == 0) {
    store.add_normal(prefix + "w", config.in_dim, config.out_dim, 1.0 / std::sqrt(static_cast<double>(config.in_dim)), rng);
    store.add_zeros(prefix + "b", 1, config.out_dim);
    return;
  }
  store.add_normal(prefix + "w1", config.in_dim, config.hidden, 1.0 / std::sqrt(static_cast<double>(config.in_dim)), rng);
  store.add_zeros(prefix + "b1", 1, config.hidden);
  store.add_normal(prefix + "w2", config.hidden, config.out_dim, 1.0 / std::sqrt(static_cast<double>(config.hidden)), rng);
  store.add_zeros(prefix + "b2", 1, config.out_dim);
}

template <typename T>
Var<T> mlp_head(const Bound<T>& params, const HeadConfig& config, const Var<T>& x, const std::string& prefix) {
  if (config.hidden == 0) return nn::linear(x, params[prefix + "w"], params[prefix + "b"]);
  const Var<T> h = nn::gelu(nn::linear(x, params[prefix + "w1"], params[prefix + "b1"]));
  return nn::linear(h, params[prefix + "w2"], params[prefix + "b2"]);
}

#define SWIT_INSTANTIATE_ENCODER(T)                                                                               \
  template void init_block(ParamStore<T>&, const std::string&, int, int, Rng&);                                   \
  template void init_encoder(ParamStore<T>&, const EncoderConfig&, Rng&, const std::string&);                     \
  template Var<T> attention_coefficients(const Var<T>&, const Var<T>&, const Var<T>&);                            \
  template Var<T> self_attention(const Var<T>&, const Var<T>&, const Var<T>&, const Var<T>&, Eigen::Index,        \
                                 Eigen::Index, int);                                                              \
  template Var<T> transformer_block(const Bound<T>&, const std::string&, const Var<T>&, Eigen::Index, Eigen::Index, \
                                    int, T, T);                                                                   \
  template Var<T> embed_tokens(Graph<T>&, const Bound<T>&, const EncoderConfig&, const Matrix<T>&, Eigen::Index,  \
                               const std::string&);                                                               \
  template Var<T> encode(Graph<T>&, const Bound<T>&, const EncoderConfig&, const Matrix<T>&, Eigen::Index,        \
                         const std::string&);                                                                     \
  template Var<T> lid_rows(const Var<T>&, Eigen::Index);                                                          \
  template void init_head(ParamStore<T>&, const HeadConfig&, Rng&, const std::string&);                           \
  template Var<T> mlp_head(const Bound<T>&, const HeadConfig&, const Var<T>&, const std::string&);

SWIT_INSTANTIATE_ENCODER(float)
SWIT_INSTANTIATE_ENCODER(double)

void append_encoder_config(nn::Checkpoint& ckpt, const EncoderConfig& config) {
  ckpt.set_counter("encoder.token_width", static_cast<std::uint64_t>(config.token_width));
  ckpt.set_counter("encoder.embed_dim", static_cast<std::uint64_t>(config.embed_dim));
  ckpt.set_counter("encoder.num_blocks", static_cast<std::uint64_t>(config.num_blocks));
  ckpt.set_counter("encoder.num_heads", static_cast<std::uint64_t>(config.num_heads));
  ckpt.set_counter("encoder.mlp_ratio", static_cast<std::uint64_t>(config.mlp_ratio));
  ckpt.set_counter("encoder.max_positions", static_cast<std::uint64_t>(config.max_positions));
  ckpt.set_counter("encoder.ln_gain_bits", std::bit_cast<std::uint64_t>(config.ln_gain));
  ckpt.set_counter("encoder.ln_eps_bits", std::bit_cast<std::uint64_t>(config.ln_eps));
  ckpt.set_counter("encoder.final_norm", config.final_norm ? 1 : 0);
}

EncoderConfig read_encoder_config(const nn::Checkpoint& ckpt) {
  EncoderConfig c;
  c.token_width = static_cast<int>(ckpt.counter("encoder.token_width"));
  c.embed_dim = static_cast<int>(ckpt.counter("encoder.embed_dim"));
  c.num_blocks = static_cast<int>(ckpt.counter("encoder.num_blocks"));
  c.num_heads = static_cast<int>(ckpt.counter("encoder.num_heads"));
  c.mlp_ratio = static_cast<int>(ckpt.counter("encoder.mlp_ratio"));
  c.max_positions = static_cast<int>(ckpt.counter("encoder.max_positions"));
  c.ln_gain = std::bit_cast<double>(ckpt.counter("encoder.ln_gain_bits"));
  c.ln_eps = std::bit_cast<double>(ckpt.counter("encoder.ln_eps_bits"));
  c.final_norm = ckpt.counter("encoder.final_norm") != 0;
  c.validate();
  return c;
}

nn::Checkpoint encoder_checkpoint(const EncoderConfig& config, const ParamStore<float>& store) {
  nn::Checkpoint ckpt;
  for (const auto& p : store.entries())
    if (p.name.rfind("encoder.", 0) == 0) ckpt.tensors.emplace_back(p.name, p.value);
  append_encoder_config(ckpt, config);
  return ckpt;
}

EncoderSnapshot load_encoder_snapshot(const nn::Checkpoint& ckpt) {
  EncoderSnapshot snap;
  snap.config = read_encoder_config(ckpt);
  Rng rng(0);
  init_encoder(snap.params, snap.config, rng);
  const std::string prefix = ckpt.has_tensor("encoder.embed") ? "" : "target/";
  if (!ckpt.has_tensor(prefix + "encoder.embed"))
    throw Error(ErrorCode::kCheckpoint, "checkpoint holds no encoder weights");
  for (auto& p : snap.params.entries()) {
    const auto& t = ckpt.tensor(prefix + p.name);
    if (t.rows() != p.value.rows() || t.cols() != p.value.cols())
      throw Error(ErrorCode::kCheckpoint, "checkpoint tensor " + prefix + p.name + " has unexpected shape");
    p.value = t;
  }
  return snap;
}

EncoderSnapshot random_encoder(const EncoderConfig& config, std::uint64_t seed) {
  EncoderSnapshot snap;
  snap.config = config;
  Rng rng = Rng(seed).derive("init");
  init_encoder(snap.params, config, rng);
  return snap;
}

}  // namespace swit
