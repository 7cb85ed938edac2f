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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "swit/augment.hpp"
#include "swit/channel_sim.hpp"
#include "swit/nn/checkpoint.hpp"
#include "swit/wit_encoder.hpp"

namespace swit {

/// Four-layer projector: hidden -> GeLU -> hidden -> GeLU -> bottleneck -> expander.
struct ProjectorConfig {
  int hidden = 128;
  int bottleneck = 32;
  int global_prototypes = 4096;
  int local_prototypes = 512;
  double expander_std = 0.002;

  void validate() const;
};

struct ModelConfig {
  EncoderConfig encoder;
  ProjectorConfig projector;

  void validate() const;
};

struct SslConfig {
  double chi_online = 0.1;   // chi_Theta
  double chi_target = 0.04;  // chi_Psi
  double beta = 0.1;
  int neighbor_window = 6;  // K_n
  int neighbor_topk = 3;    // K_k

  void validate() const;
};

/// Registers encoder, both attention-pool blocks and both projectors:
/// "encoder.*", "nu_global.*", "nu_local.*", "proj_global.*", "proj_local.*".
template <typename T>
void init_model(ParamStore<T>& store, const ModelConfig& config, Rng& rng);

/// Pool block under `prefix`: transformer block weights plus the learnable "pool" token.
template <typename T>
void init_attention_pool(ParamStore<T>& store, const std::string& prefix, int dim, int hidden, Rng& rng);

template <typename T>
void init_projector(ParamStore<T>& store, const std::string& prefix, int dim, const ProjectorConfig& config,
                    int prototypes, Rng& rng);

/// nu: prepends the pool token to each set, runs one transformer block and
/// returns the pool token's output. `members` lists set_size row indices of
/// `source` per set; the result has one row per set.
template <typename T>
Var<T> attention_pool(const Bound<T>& params, const std::string& prefix, const Var<T>& source,
                      std::span<const int> members, Eigen::Index set_size, int heads, T ln_gain, T ln_eps);

template <typename T>
Var<T> projector(const Bound<T>& params, const std::string& prefix, const Var<T>& x);

/// Row-wise softmax((z - center) / chi); `center` may be empty.
template <typename T>
Matrix<T> sharpen_center(const Matrix<T>& z, double chi, const Matrix<T>& center);

/// Online global logits z0 for every sequence of an encoded batch: MLP1(nu({o_n})).
template <typename T>
Var<T> global_logits(const Bound<T>& params, const ModelConfig& config, const Var<T>& encoded, Eigen::Index num_seqs);

/// Online branch probabilities, log form: log softmax(MLP1(nu(.)) / chi_online).
template <typename T>
Var<T> global_embed_online(const Bound<T>& params, const ModelConfig& config, const SslConfig& ssl,
                           const Var<T>& encoded, Eigen::Index num_seqs);

/// Target branch probabilities softmax((MLP1(nu(.)) - center) / chi_target); no gradient.
template <typename T>
Matrix<T> global_embed_target(const ParamStore<T>& target, const ModelConfig& config, const SslConfig& ssl,
                              const Matrix<T>& encoded, Eigen::Index num_seqs, const Matrix<T>& center);

/// Cross-entropy between target global views (rows b*2 + v) and every other
/// online view (rows b*V + v'), averaged over the 2(V-1) pairs and the batch.
template <typename T>
Var<T> loss_macro(const Var<T>& online_logp, const Matrix<T>& target_probs, Eigen::Index num_views);

/// Indices of the K_k neighbours of token i: the K_n tokens closest in index
/// (ties to the lower index), ranked by cosine similarity (ties to the lower index).
template <typename T>
std::vector<int> neighborhood_topk(const Matrix<T>& reps, int i, int window, int topk);

/// Target-side NN aggregate logits MLP2_Psi(nu_Psi({o_j : j in P_i})) for every
/// token of every sequence of a target-encoded batch (LID rows excluded).
template <typename T>
Matrix<T> micro_target_logits(const ParamStore<T>& target, const ModelConfig& config, const SslConfig& ssl,
                              const Matrix<T>& encoded, Eigen::Index num_seqs);

/// Online per-token log-probabilities log softmax(MLP2(o_i) / chi_online), LID rows excluded.
template <typename T>
Var<T> micro_online(const Bound<T>& params, const ModelConfig& config, const SslConfig& ssl, const Var<T>& encoded,
                    Eigen::Index num_seqs);

/// One view group for the micro loss: token rows of num_seqs sequences of
/// tokens_per_seq tokens each.
template <typename T>
struct MicroTerms {
  Var<T> online_logp;
  Matrix<T> target_probs;
  Eigen::Index num_seqs = 0;
  Eigen::Index tokens_per_seq = 0;
};

/// L_s over all groups; sequences across groups add up to B * V.
template <typename T>
Var<T> loss_micro(std::span<const MicroTerms<T>> groups);

template <typename T>
Var<T> total_loss(const Var<T>& macro, const Var<T>& micro, double beta);

/// Views of a minibatch grouped by length: global sequence b*num_global + v,
/// local sequence b*num_local + j.
template <typename T>
struct ViewBatch {
  Eigen::Index batch = 0;
  Eigen::Index num_global = 0;
  Eigen::Index num_local = 0;
  Matrix<T> global_tokens;
  Matrix<T> local_tokens;

  Eigen::Index num_views() const { return num_global + num_local; }
};

template <typename T>
ViewBatch<T> assemble_views(std::span<const std::vector<TokenSequence>> per_sample);

template <typename T>
struct SslResult {
  Var<T> total;
  Var<T> macro;
  Var<T> micro;
  Matrix<T> target_global_logits;  // pre-centering, one row per target global view
  Matrix<T> target_local_logits;   // pre-centering, one row per token of every view
};

/// Full L_SSL for one minibatch. The online branch lives in `graph`; the target
/// branch is evaluated separately and enters only as constants.
template <typename T>
SslResult<T> ssl_forward(Graph<T>& graph, const Bound<T>& online, const ParamStore<T>& target,
                         const ModelConfig& config, const SslConfig& ssl, const ViewBatch<T>& views,
                         const Matrix<T>& center_global, const Matrix<T>& center_local);

/// center <- momentum * center + (1 - momentum) * mean over rows of outputs.
template <typename T>
void update_center(Matrix<T>& center, const Matrix<T>& outputs, double momentum);

/// target <- kappa * target + (1 - kappa) * online, entry by entry.
template <typename T>
void ema_update(ParamStore<T>& target, const ParamStore<T>& online, double kappa);

struct TrainerConfig {
  ModelConfig model;
  SslConfig ssl;
  AugmentPolicy augment;
  int batch_size = 128;
  int epochs = 100;
  int warmup_epochs = 10;
  double base_lr = 1.5e-4;
  double min_lr = 1e-6;
  double wd_start = 0.04;
  double wd_end = 0.4;
  double clip_norm = 3.0;
  double center_momentum = 0.9;  // Lambda
  double kappa_base = 0.996;
  bool freeze_first_epoch = true;
  int chunk_size = 16;
  int checkpoint_every = 0;  // epochs; 0 disables intermediate checkpoints
  std::uint64_t seed = 1;

  double peak_lr() const { return base_lr * batch_size / 256.0; }
  void validate() const;
};

struct StepStats {
  std::int64_t step = 0;
  double macro = 0.0;
  double micro = 0.0;
  double loss = 0.0;
  double lr = 0.0;
  double weight_decay = 0.0;
  double kappa = 0.0;
  double grad_norm = 0.0;
};

class Trainer {
 public:
  Trainer(TrainerConfig config, const Dataset& data);

  const TrainerConfig& config() const { return config_; }
  std::int64_t step_index() const { return step_; }
  std::int64_t steps_per_epoch() const { return steps_per_epoch_; }
  std::int64_t total_steps() const { return steps_per_epoch_ * config_.epochs; }

  double lr_at(std::int64_t step) const;
  double weight_decay_at(std::int64_t step) const;
  double kappa_at(std::int64_t step) const;

  /// Dataset sample indices of the minibatch used at `step`.
  std::vector<std::size_t> batch_indices(std::int64_t step) const;

  /// One optimization step; NumericError names the step on a non-finite loss.
  StepStats step();

  ParamStore<float>& online() { return online_; }
  ParamStore<float>& target() { return target_; }
  const ParamStore<float>& online() const { return online_; }
  const ParamStore<float>& target() const { return target_; }
  const Matrix<float>& center_global() const { return center_global_; }
  const Matrix<float>& center_local() const { return center_local_; }

  nn::Checkpoint checkpoint() const;
  void restore(const nn::Checkpoint& ckpt);

 private:
  TrainerConfig config_;
  const Dataset* data_;
  std::vector<TokenSequence> bases_;
  ParamStore<float> online_;
  ParamStore<float> target_;
  Matrix<float> center_global_;
  Matrix<float> center_local_;
  std::int64_t step_ = 0;
  std::int64_t steps_per_epoch_ = 0;
};

/// Loss trace CSV with header step,L_c,L_s,L_SSL,lr,wd,kappa.
void write_loss_trace(std::ostream& out, std::span<const StepStats> trace);

struct PretrainOptions {
  std::filesystem::path out_dir;  // empty: nothing written
  std::function<void(const StepStats&)> on_step;
  std::int64_t max_steps = -1;  // stop early after this many steps when >= 0
};

struct PretrainResult {
  std::vector<StepStats> trace;
  nn::Checkpoint final_state;
  nn::Checkpoint encoder;  // target encoder Psi*
  double seconds = 0.0;
};

/// Trains from scratch; with out_dir set, writes loss_trace.csv, final.ckpt,
/// encoder.ckpt and epoch_<u>.ckpt every checkpoint_every epochs.
PretrainResult pretrain(const Dataset& data, const TrainerConfig& config, const PretrainOptions& options = {});

}  // namespace swit
