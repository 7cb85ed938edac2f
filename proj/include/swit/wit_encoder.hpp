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

#include <string>

#include "swit/nn/checkpoint.hpp"
#include "swit/nn/ops.hpp"
#include "swit/nn/params.hpp"
#include "swit/rng.hpp"

namespace swit {

using nn::Bound;
using nn::Graph;
using nn::Matrix;
using nn::ParamStore;
using nn::Var;

struct EncoderConfig {
  int token_width = 48;  // 3 N_r
  int embed_dim = 64;    // D
  int num_blocks = 1;
  int num_heads = 1;
  int mlp_ratio = 4;
  int max_positions = 37;  // row 0 is the LID slot and carries no positional vector
  double ln_gain = 1.0;    // zeta
  double ln_eps = 1e-4;    // iota
  bool final_norm = true;

  int mlp_hidden() const { return mlp_ratio * embed_dim; }
  void validate() const;
};

/// Pre-norm transformer block parameters under `prefix`: wq, wk, wv, wo (D x D),
/// mlp.w1 (D x hidden), mlp.b1, mlp.w2 (hidden x D), mlp.b2.
template <typename T>
void init_block(ParamStore<T>& store, const std::string& prefix, int dim, int hidden, Rng& rng);

/// Registers embed (3N_r x D), pos (max_positions x D), lid (1 x D) and the blocks.
template <typename T>
void init_encoder(ParamStore<T>& store, const EncoderConfig& config, Rng& rng, const std::string& prefix = "encoder.");

/// alpha_ij = (e_i W_q)(e_j W_k)^T / sqrt(D) for a single normalized sequence.
template <typename T>
Var<T> attention_coefficients(const Var<T>& normed, const Var<T>& wq, const Var<T>& wk);

/// softmax(alpha) (e W_v) for `num_seqs` stacked sequences of `seq_len` rows.
template <typename T>
Var<T> self_attention(const Var<T>& normed, const Var<T>& wq, const Var<T>& wk, const Var<T>& wv, Eigen::Index num_seqs,
                      Eigen::Index seq_len, int heads);

/// X <- X + Attn(LN(X)) W_o;  X <- X + MLP(LN(X)).
template <typename T>
Var<T> transformer_block(const Bound<T>& params, const std::string& prefix, const Var<T>& x, Eigen::Index num_seqs,
                         Eigen::Index seq_len, int heads, T ln_gain, T ln_eps);

/// Token embedding, positional vectors and LID prefix. `tokens` stacks num_seqs
/// sequences of equal length; output has num_seqs blocks of length+1 rows with
/// the LID at row 0 of each block.
template <typename T>
Var<T> embed_tokens(Graph<T>& graph, const Bound<T>& params, const EncoderConfig& config, const Matrix<T>& tokens,
                    Eigen::Index num_seqs, const std::string& prefix = "encoder.");

/// Full encoder: embed_tokens, the blocks, optional final layer norm.
template <typename T>
Var<T> encode(Graph<T>& graph, const Bound<T>& params, const EncoderConfig& config, const Matrix<T>& tokens,
              Eigen::Index num_seqs, const std::string& prefix = "encoder.");

/// Rows 0, L+1, 2(L+1), ... of an encoded batch: the LID representations.
template <typename T>
Var<T> lid_rows(const Var<T>& encoded, Eigen::Index num_seqs);

struct HeadConfig {
  int in_dim = 64;
  int out_dim = 2;
  int hidden = 0;  // 0: single linear layer; otherwise linear -> GeLU -> linear
};

template <typename T>
void init_head(ParamStore<T>& store, const HeadConfig& config, Rng& rng, const std::string& prefix = "head.");

template <typename T>
Var<T> mlp_head(const Bound<T>& params, const HeadConfig& config, const Var<T>& x, const std::string& prefix = "head.");

/// Frozen encoder weights (named "encoder.*") and the matching configuration.
struct EncoderSnapshot {
  EncoderConfig config;
  ParamStore<float> params;
};

/// Stores the configuration as checkpoint counters.
void append_encoder_config(nn::Checkpoint& ckpt, const EncoderConfig& config);
EncoderConfig read_encoder_config(const nn::Checkpoint& ckpt);

/// Encoder-only checkpoint holding the "encoder.*" entries of `store`.
nn::Checkpoint encoder_checkpoint(const EncoderConfig& config, const ParamStore<float>& store);

/// Reads "encoder.*" tensors, falling back to the target copy "target/encoder.*" of a training checkpoint.
EncoderSnapshot load_encoder_snapshot(const nn::Checkpoint& ckpt);

/// Fresh randomly initialized encoder.
EncoderSnapshot random_encoder(const EncoderConfig& config, std::uint64_t seed);

}  // namespace swit
