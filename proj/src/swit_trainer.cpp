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

#include "swit/swit_trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

#include "swit/nn/optim.hpp"
#include "swit/parallel.hpp"

namespace swit {

void ProjectorConfig::validate() const {
  if (hidden < 1 || bottleneck < 1 || global_prototypes < 1 || local_prototypes < 1)
    throw InvalidArgument("projector: dimensions must be positive");
  if (!(expander_std > 0.0)) throw InvalidArgument("projector: expander_std must be > 0");
}

void ModelConfig::validate() const {
  encoder.validate();
  projector.validate();
}

void SslConfig::validate() const {
  if (!(chi_online > chi_target && chi_target > 0.0))
    throw InvalidArgument("ssl: temperatures must satisfy chi_online > chi_target > 0");
  if (beta < 0.0) throw InvalidArgument("ssl: beta must be >= 0");
  if (neighbor_topk < 1 || neighbor_topk > neighbor_window)
    throw InvalidArgument("ssl: need 1 <= neighbor_topk <= neighbor_window");
}

template <typename T>
void init_attention_pool(ParamStore<T>& store, const std::string& prefix, int dim, int hidden, Rng& rng) {
  init_block(store, prefix, dim, hidden, rng);
  store.add_normal(prefix + "pool", 1, dim, 0.02, rng, false);
}

template <typename T>
void init_projector(ParamStore<T>& store, const std::string& prefix, int dim, const ProjectorConfig& config,
                    int prototypes, Rng& rng) {
  const int h = config.hidden;
  store.add_normal(prefix + "l1.w", dim, h, 1.0 / std::sqrt(static_cast<double>(dim)), rng);
  store.add_zeros(prefix + "l1.b", 1, h);
  store.add_normal(prefix + "l2.w", h, h, 1.0 / std::sqrt(static_cast<double>(h)), rng);
  store.add_zeros(prefix + "l2.b", 1, h);
  store.add_normal(prefix + "l3.w", h, config.bottleneck, 1.0 / std::sqrt(static_cast<double>(h)), rng);
  store.add_zeros(prefix + "l3.b", 1, config.bottleneck);
  store.add_normal(prefix + "out.w", config.bottleneck, prototypes, config.expander_std, rng);
}

template <typename T>
void init_model(ParamStore<T>& store, const ModelConfig& config, Rng& rng) {
  config.validate();
  init_encoder(store, config.encoder, rng, "encoder.");
  const int d = config.encoder.embed_dim;
  const int hidden = config.encoder.mlp_hidden();
  init_attention_pool(store, "nu_global.", d, hidden, rng);
  init_attention_pool(store, "nu_local.", d, hidden, rng);
  init_projector(store, "proj_global.", d, config.projector, config.projector.global_prototypes, rng);
  init_projector(store, "proj_local.", d, config.projector, config.projector.local_prototypes, rng);
}

template <typename T>
Var<T> attention_pool(const Bound<T>& params, const std::string& prefix, const Var<T>& source,
                      std::span<const int> members, Eigen::Index set_size, int heads, T ln_gain, T ln_eps) {
  if (set_size < 1 || members.empty()) throw InvalidArgument("attention_pool: empty set");
  if (members.size() % static_cast<std::size_t>(set_size) != 0)
    throw InvalidArgument("attention_pool: member count not divisible by set size");
  const Eigen::Index num_sets = static_cast<Eigen::Index>(members.size()) / set_size;
  const int pool_row = static_cast<int>(source.rows());
  for (const int m : members)
    if (m < 0 || m >= pool_row) throw InvalidArgument("attention_pool: member index out of range");

  const Var<T> wq = params[prefix + "wq"];
  const Var<T> wk = params[prefix + "wk"];
  const Var<T> wv = params[prefix + "wv"];
  const Var<T> pool = params[prefix + "pool"];

  const Var<T> h = nn::layer_norm_rows(source, ln_gain, ln_eps);
  const Var<T> hp = nn::layer_norm_rows(pool, ln_gain, ln_eps);
  const Var<T> k_parts[] = {nn::matmul(h, wk), nn::matmul(hp, wk)};
  const Var<T> v_parts[] = {nn::matmul(h, wv), nn::matmul(hp, wv)};
  const Var<T> k_all = nn::concat_rows<T>(k_parts);
  const Var<T> v_all = nn::concat_rows<T>(v_parts);

  std::vector<int> index;
  index.reserve(static_cast<std::size_t>(num_sets * (set_size + 1)));
  for (Eigen::Index s = 0; s < num_sets; ++s) {
    index.push_back(pool_row);
    for (Eigen::Index j = 0; j < set_size; ++j) index.push_back(members[static_cast<std::size_t>(s * set_size + j)]);
  }
  const std::vector<int> zeros(static_cast<std::size_t>(num_sets), 0);

  const Var<T> q = nn::gather_rows(nn::matmul(hp, wq), std::span<const int>(zeros));
  const Var<T> k = nn::gather_rows(k_all, std::span<const int>(index));
  const Var<T> v = nn::gather_rows(v_all, std::span<const int>(index));
  const Var<T> attended = nn::attention(q, k, v, num_sets, 1, set_size + 1, heads);
  const Var<T> x1 = nn::add(nn::gather_rows(pool, std::span<const int>(zeros)), nn::matmul(attended, params[prefix + "wo"]));
  const Var<T> h2 = nn::layer_norm_rows(x1, ln_gain, ln_eps);
  const Var<T> hidden = nn::gelu(nn::linear(h2, params[prefix + "mlp.w1"], params[prefix + "mlp.b1"]));
  return nn::add(x1, nn::linear(hidden, params[prefix + "mlp.w2"], params[prefix + "mlp.b2"]));
}

template <typename T>
Var<T> projector(const Bound<T>& params, const std::string& prefix, const Var<T>& x) {
  Var<T> h = nn::gelu(nn::linear(x, params[prefix + "l1.w"], params[prefix + "l1.b"]));
  h = nn::gelu(nn::linear(h, params[prefix + "l2.w"], params[prefix + "l2.b"]));
  h = nn::linear(h, params[prefix + "l3.w"], params[prefix + "l3.b"]);
  return nn::matmul(h, params[prefix + "out.w"]);
}

template <typename T>
Matrix<T> sharpen_center(const Matrix<T>& z, double chi, const Matrix<T>& center) {
  if (!(chi > 0.0)) throw InvalidArgument("sharpen_center: temperature must be > 0");
  Matrix<T> out = z;
  if (center.size() != 0) {
    if (center.rows() != 1 || center.cols() != z.cols()) throw ShapeMismatch("sharpen_center: center shape");
    out.rowwise() -= center.row(0);
  }
  out /= static_cast<T>(chi);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return out;
}

namespace {

template <typename T>
T gain_of(const ModelConfig& c) {
  return static_cast<T>(c.encoder.ln_gain);
}
template <typename T>
T eps_of(const ModelConfig& c) {
  return static_cast<T>(c.encoder.ln_eps);
}

std::vector<int> iota_members(Eigen::Index n) {
  std::vector<int> m(static_cast<std::size_t>(n));
  std::iota(m.begin(), m.end(), 0);
  return m;
}

template <typename T>
Var<T> token_rows(const Var<T>& encoded, Eigen::Index num_seqs) {
  const Eigen::Index len = encoded.rows() / num_seqs;
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(num_seqs * (len - 1)));
  for (Eigen::Index s = 0; s < num_seqs; ++s)
    for (Eigen::Index i = 1; i < len; ++i) idx.push_back(static_cast<int>(s * len + i));
  return nn::gather_rows(encoded, std::span<const int>(idx));
}

void check_batched(Eigen::Index rows, Eigen::Index num_seqs, const char* what) {
  if (num_seqs < 1 || rows % num_seqs != 0)
    throw ShapeMismatch(std::string(what) + ": rows not divisible by sequence count");
}

}  // namespace

template <typename T>
Var<T> global_logits(const Bound<T>& params, const ModelConfig& config, const Var<T>& encoded, Eigen::Index num_seqs) {
  check_batched(encoded.rows(), num_seqs, "global_logits");
  const Eigen::Index len = encoded.rows() / num_seqs;
  const std::vector<int> members = iota_members(encoded.rows());
  const Var<T> pooled = attention_pool(params, "nu_global.", encoded, std::span<const int>(members), len,
                                       config.encoder.num_heads, gain_of<T>(config), eps_of<T>(config));
  return projector(params, "proj_global.", pooled);
}

template <typename T>
Var<T> global_embed_online(const Bound<T>& params, const ModelConfig& config, const SslConfig& ssl,
                           const Var<T>& encoded, Eigen::Index num_seqs) {
  const Var<T> z = global_logits(params, config, encoded, num_seqs);
  return nn::log_softmax_rows(nn::scale(z, static_cast<T>(1.0 / ssl.chi_online)));
}

template <typename T>
Matrix<T> global_embed_target(const ParamStore<T>& target, const ModelConfig& config, const SslConfig& ssl,
                              const Matrix<T>& encoded, Eigen::Index num_seqs, const Matrix<T>& center) {
  Graph<T> g;
  const Bound<T> params(g, target, false);
  const Var<T> z = global_logits(params, config, g.constant(encoded), num_seqs);
  return sharpen_center(z.value(), ssl.chi_target, center);
}

template <typename T>
Var<T> loss_macro(const Var<T>& online_logp, const Matrix<T>& target_probs, Eigen::Index num_views) {
  if (num_views < 2) throw InvalidArgument("loss_macro: need at least two views");
  check_batched(online_logp.rows(), num_views, "loss_macro");
  const Eigen::Index batch = online_logp.rows() / num_views;
  if (target_probs.rows() != 2 * batch || target_probs.cols() != online_logp.cols())
    throw ShapeMismatch("loss_macro: target must hold two global views per sample");
  Matrix<T> w = Matrix<T>::Zero(online_logp.rows(), online_logp.cols());
  for (Eigen::Index b = 0; b < batch; ++b)
    for (Eigen::Index v = 0; v < num_views; ++v)
      for (Eigen::Index t = 0; t < 2; ++t)
        if (t != v) w.row(b * num_views + v) += target_probs.row(b * 2 + t);
  w *= static_cast<T>(-1.0 / (2.0 * static_cast<double>(num_views - 1) * static_cast<double>(batch)));
  return nn::weighted_sum(online_logp, w);
}

template <typename T>
std::vector<int> neighborhood_topk(const Matrix<T>& reps, int i, int window, int topk) {
  const int count = static_cast<int>(reps.rows());
  if (topk < 1 || topk > window) throw InvalidArgument("neighborhood_topk: need 1 <= topk <= window");
  if (window > count - 1) throw InvalidArgument("neighborhood_topk: sequence too short for the neighbourhood");
  if (i < 0 || i >= count) throw InvalidArgument("neighborhood_topk: token index out of range");
  std::vector<int> hood;
  hood.reserve(static_cast<std::size_t>(window));
  for (int d = 1; static_cast<int>(hood.size()) < window; ++d) {
    if (i - d >= 0) hood.push_back(i - d);
    if (static_cast<int>(hood.size()) < window && i + d < count) hood.push_back(i + d);
  }
  const T norm_i = reps.row(i).norm();
  std::vector<std::pair<T, int>> scored;
  scored.reserve(hood.size());
  for (const int j : hood) {
    const T denom = norm_i * reps.row(j).norm();
    const T rho = denom > T(0) ? reps.row(i).dot(reps.row(j)) / denom : T(0);
    scored.emplace_back(rho, j);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  std::vector<int> out(static_cast<std::size_t>(topk));
  for (int k = 0; k < topk; ++k) out[static_cast<std::size_t>(k)] = scored[static_cast<std::size_t>(k)].second;
  return out;
}

template <typename T>
Matrix<T> micro_target_logits(const ParamStore<T>& target, const ModelConfig& config, const SslConfig& ssl,
                              const Matrix<T>& encoded, Eigen::Index num_seqs) {
  check_batched(encoded.rows(), num_seqs, "micro_target_logits");
  const Eigen::Index len = encoded.rows() / num_seqs;
  const Eigen::Index tokens = len - 1;
  const int topk = ssl.neighbor_topk;
  std::vector<int> members(static_cast<std::size_t>(num_seqs * tokens * topk));
  parallel_for(static_cast<std::size_t>(num_seqs), [&](std::size_t s) {
    const Eigen::Index base = static_cast<Eigen::Index>(s) * len + 1;
    const Matrix<T> reps = encoded.middleRows(base, tokens);
    for (Eigen::Index i = 0; i < tokens; ++i) {
      const std::vector<int> nn_idx = neighborhood_topk(reps, static_cast<int>(i), ssl.neighbor_window, topk);
      const std::size_t off = static_cast<std::size_t>((static_cast<Eigen::Index>(s) * tokens + i) * topk);
      for (int k = 0; k < topk; ++k)
        members[off + static_cast<std::size_t>(k)] = static_cast<int>(base) + nn_idx[static_cast<std::size_t>(k)];
    }
  });
  Graph<T> g;
  const Bound<T> params(g, target, false);
  const Var<T> pooled = attention_pool(params, "nu_local.", g.constant(encoded), std::span<const int>(members), topk,
                                       config.encoder.num_heads, gain_of<T>(config), eps_of<T>(config));
  return projector(params, "proj_local.", pooled).value();
}

template <typename T>
Var<T> micro_online(const Bound<T>& params, const ModelConfig&, const SslConfig& ssl, const Var<T>& encoded,
                    Eigen::Index num_seqs) {
  check_batched(encoded.rows(), num_seqs, "micro_online");
  const Var<T> z = projector(params, "proj_local.", token_rows(encoded, num_seqs));
  return nn::log_softmax_rows(nn::scale(z, static_cast<T>(1.0 / ssl.chi_online)));
}

template <typename T>
Var<T> loss_micro(std::span<const MicroTerms<T>> groups) {
  if (groups.empty()) throw InvalidArgument("loss_micro: no view groups");
  Eigen::Index total_seqs = 0;
  for (const auto& grp : groups) total_seqs += grp.num_seqs;
  Var<T> acc;
  for (const auto& grp : groups) {
    if (grp.tokens_per_seq < 1 || grp.online_logp.rows() != grp.num_seqs * grp.tokens_per_seq ||
        grp.target_probs.rows() != grp.online_logp.rows() || grp.target_probs.cols() != grp.online_logp.cols())
      throw ShapeMismatch("loss_micro: group shapes disagree");
    const Matrix<T> w = grp.target_probs * static_cast<T>(-1.0 / (static_cast<double>(total_seqs) *
                                                                  static_cast<double>(grp.tokens_per_seq)));
    const Var<T> term = nn::weighted_sum(grp.online_logp, w);
    acc = acc.valid() ? nn::add(acc, term) : term;
  }
  return acc;
}

template <typename T>
Var<T> total_loss(const Var<T>& macro, const Var<T>& micro, double beta) {
  return nn::add(macro, nn::scale(micro, static_cast<T>(beta)));
}

template <typename T>
ViewBatch<T> assemble_views(std::span<const std::vector<TokenSequence>> per_sample) {
  if (per_sample.empty()) throw InvalidArgument("assemble_views: empty batch");
  ViewBatch<T> vb;
  vb.batch = static_cast<Eigen::Index>(per_sample.size());
  const auto& first = per_sample.front();
  if (first.size() < 2) throw InvalidArgument("assemble_views: need two global views per sample");
  vb.num_global = 2;
  vb.num_local = static_cast<Eigen::Index>(first.size()) - 2;
  const Eigen::Index width = first[0].width();
  const Eigen::Index lg = first[0].length();
  const Eigen::Index ll = vb.num_local > 0 ? first[2].length() : 0;
  vb.global_tokens.resize(vb.batch * 2 * lg, width);
  vb.local_tokens.resize(vb.batch * vb.num_local * ll, width);
  for (Eigen::Index b = 0; b < vb.batch; ++b) {
    const auto& views = per_sample[static_cast<std::size_t>(b)];
    if (static_cast<Eigen::Index>(views.size()) != vb.num_views())
      throw ShapeMismatch("assemble_views: samples disagree on view count");
    for (Eigen::Index v = 0; v < vb.num_views(); ++v) {
      const auto& tok = views[static_cast<std::size_t>(v)].tokens;
      const bool global = v < 2;
      const Eigen::Index len = global ? lg : ll;
      if (tok.rows() != len || tok.cols() != width) throw ShapeMismatch("assemble_views: view shapes disagree");
      if (global)
        vb.global_tokens.middleRows((b * 2 + v) * lg, lg) = tok.cast<T>();
      else
        vb.local_tokens.middleRows((b * vb.num_local + v - 2) * ll, ll) = tok.cast<T>();
    }
  }
  return vb;
}

template <typename T>
SslResult<T> ssl_forward(Graph<T>& graph, const Bound<T>& online, const ParamStore<T>& target,
                         const ModelConfig& config, const SslConfig& ssl, const ViewBatch<T>& views,
                         const Matrix<T>& center_global, const Matrix<T>& center_local) {
  const Eigen::Index batch = views.batch;
  const Eigen::Index n_global = batch * views.num_global;
  const Eigen::Index n_local = batch * views.num_local;
  const Eigen::Index num_views = views.num_views();
  const bool has_local = n_local > 0;

  SslResult<T> out;
  Matrix<T> target_global_probs;
  Matrix<T> target_tok_global;
  Matrix<T> target_tok_local;
  {
    Graph<T> tg;
    const Bound<T> tb(tg, target, false);
    const Var<T> enc_g = encode(tg, tb, config.encoder, views.global_tokens, n_global);
    out.target_global_logits = global_logits(tb, config, enc_g, n_global).value();
    target_global_probs = sharpen_center(out.target_global_logits, ssl.chi_target, center_global);
    target_tok_global = micro_target_logits(target, config, ssl, enc_g.value(), n_global);
    if (has_local) {
      const Var<T> enc_l = encode(tg, tb, config.encoder, views.local_tokens, n_local);
      target_tok_local = micro_target_logits(target, config, ssl, enc_l.value(), n_local);
    }
  }
  out.target_local_logits.resize(target_tok_global.rows() + target_tok_local.rows(), target_tok_global.cols());
  out.target_local_logits.topRows(target_tok_global.rows()) = target_tok_global;
  if (has_local) out.target_local_logits.bottomRows(target_tok_local.rows()) = target_tok_local;

  const Var<T> enc_g = encode(graph, online, config.encoder, views.global_tokens, n_global);
  Var<T> enc_l;
  std::vector<Var<T>> z_parts{global_logits(online, config, enc_g, n_global)};
  if (has_local) {
    enc_l = encode(graph, online, config.encoder, views.local_tokens, n_local);
    z_parts.push_back(global_logits(online, config, enc_l, n_local));
  }
  std::vector<int> order(static_cast<std::size_t>(batch * num_views));
  for (Eigen::Index b = 0; b < batch; ++b)
    for (Eigen::Index v = 0; v < num_views; ++v)
      order[static_cast<std::size_t>(b * num_views + v)] =
          static_cast<int>(v < views.num_global ? b * views.num_global + v
                                                : n_global + b * views.num_local + (v - views.num_global));
  const Var<T> z_all = nn::gather_rows(nn::concat_rows<T>(z_parts), std::span<const int>(order));
  const Var<T> logp = nn::log_softmax_rows(nn::scale(z_all, static_cast<T>(1.0 / ssl.chi_online)));
  out.macro = loss_macro(logp, target_global_probs, num_views);

  std::vector<MicroTerms<T>> groups;
  const Eigen::Index lg = enc_g.rows() / n_global - 1;
  groups.push_back({micro_online(online, config, ssl, enc_g, n_global),
                    sharpen_center(target_tok_global, ssl.chi_target, center_local), n_global, lg});
  if (has_local) {
    const Eigen::Index ll = enc_l.rows() / n_local - 1;
    groups.push_back({micro_online(online, config, ssl, enc_l, n_local),
                      sharpen_center(target_tok_local, ssl.chi_target, center_local), n_local, ll});
  }
  out.micro = loss_micro(std::span<const MicroTerms<T>>(groups));
  out.total = total_loss(out.macro, out.micro, ssl.beta);
  return out;
}

template <typename T>
void update_center(Matrix<T>& center, const Matrix<T>& outputs, double momentum) {
  if (outputs.rows() < 1) throw InvalidArgument("update_center: no outputs");
  if (center.rows() != 1 || center.cols() != outputs.cols()) throw ShapeMismatch("update_center: center shape");
  const T lambda = static_cast<T>(momentum);
  center = lambda * center + (T(1) - lambda) * outputs.colwise().mean();
}

template <typename T>
void ema_update(ParamStore<T>& target, const ParamStore<T>& online, double kappa) {
  if (target.size() != online.size()) throw ShapeMismatch("ema_update: stores differ");
  const T k = static_cast<T>(kappa);
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto& t = target.entries()[i].value;
    const auto& o = online.entries()[i].value;
    if (t.rows() != o.rows() || t.cols() != o.cols()) throw ShapeMismatch("ema_update: parameter shapes differ");
    t = k * t + (T(1) - k) * o;
  }
}

void TrainerConfig::validate() const {
  model.validate();
  ssl.validate();
  augment.validate();
  if (batch_size < 1 || epochs < 1 || warmup_epochs < 0 || chunk_size < 1 || checkpoint_every < 0)
    throw InvalidArgument("trainer: batch_size, epochs and chunk_size must be positive");
  if (!(base_lr > 0.0) || min_lr < 0.0) throw InvalidArgument("trainer: learning rates must be positive");
  if (wd_start < 0.0 || wd_end < 0.0) throw InvalidArgument("trainer: weight decay must be >= 0");
  if (!(clip_norm > 0.0)) throw InvalidArgument("trainer: clip_norm must be > 0");
  if (center_momentum < 0.0 || center_momentum > 1.0) throw InvalidArgument("trainer: center_momentum outside [0, 1]");
  if (kappa_base < 0.0 || kappa_base > 1.0) throw InvalidArgument("trainer: kappa_base outside [0, 1]");
  const int longest = std::max(augment.global1.target_length, augment.global2.target_length);
  if (model.encoder.max_positions < longest + 1)
    throw InvalidArgument("trainer: max_positions smaller than the longest view plus the LID slot");
  if (augment.global1.target_length != augment.global2.target_length)
    throw InvalidArgument("trainer: both global views must share one length");
  const int shortest = std::min(augment.global1.target_length, augment.local.target_length);
  if (ssl.neighbor_window > shortest - 1) throw InvalidArgument("trainer: views too short for neighbor_window");
}

Trainer::Trainer(TrainerConfig config, const Dataset& data) : config_(std::move(config)), data_(&data) {
  config_.validate();
  if (data.size() == 0) throw InvalidArgument("trainer: empty dataset");
  if (config_.model.encoder.token_width != 3 * data.num_antennas)
    throw ShapeMismatch("trainer: encoder token_width " + std::to_string(config_.model.encoder.token_width) +
                        " does not match 3 x " + std::to_string(data.num_antennas) + " antennas");
  bases_.resize(data.size());
  parallel_for(data.size(), [&](std::size_t i) { bases_[i] = to_real_repr(data.samples[i].channel); });
  Rng rng = Rng(config_.seed).derive("init");
  init_model(online_, config_.model, rng);
  target_ = online_;
  center_global_ = Matrix<float>::Zero(1, config_.model.projector.global_prototypes);
  center_local_ = Matrix<float>::Zero(1, config_.model.projector.local_prototypes);
  const auto n = static_cast<std::int64_t>(data.size());
  steps_per_epoch_ = (n + config_.batch_size - 1) / config_.batch_size;
}

double Trainer::lr_at(std::int64_t step) const {
  return nn::cosine_schedule(static_cast<double>(step), static_cast<double>(total_steps()), config_.peak_lr(),
                             config_.min_lr, static_cast<double>(config_.warmup_epochs * steps_per_epoch_));
}

double Trainer::weight_decay_at(std::int64_t step) const {
  return nn::cosine_ramp(static_cast<double>(step) / static_cast<double>(steps_per_epoch_), config_.epochs,
                         config_.wd_start, config_.wd_end);
}

double Trainer::kappa_at(std::int64_t step) const {
  return nn::ema_momentum(static_cast<double>(step) / static_cast<double>(steps_per_epoch_), config_.epochs,
                          config_.kappa_base);
}

std::vector<std::size_t> Trainer::batch_indices(std::int64_t step) const {
  const std::int64_t epoch = step / steps_per_epoch_;
  const std::int64_t k = step % steps_per_epoch_;
  const std::size_t n = data_->size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = Rng(config_.seed).derive("shuffle").derive(static_cast<std::uint64_t>(epoch));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1));
    std::swap(perm[i - 1], perm[j]);
  }
  const std::size_t begin = static_cast<std::size_t>(k) * static_cast<std::size_t>(config_.batch_size);
  const std::size_t end = std::min(n, begin + static_cast<std::size_t>(config_.batch_size));
  return {perm.begin() + static_cast<std::ptrdiff_t>(begin), perm.begin() + static_cast<std::ptrdiff_t>(end)};
}

StepStats Trainer::step() {
  const std::int64_t step = step_;
  const std::vector<std::size_t> idx = batch_indices(step);
  const std::size_t n = idx.size();

  std::vector<std::vector<TokenSequence>> views(n);
  const Rng step_rng = Rng(config_.seed).derive("augment").derive(static_cast<std::uint64_t>(step));
  parallel_for(n, [&](std::size_t b) {
    Rng rng = step_rng.derive(static_cast<std::uint64_t>(idx[b]));
    views[b] = make_views(bases_[idx[b]], config_.augment, data_->norm, rng);
  });

  struct ChunkOut {
    double weight = 0.0;
    double macro = 0.0;
    double micro = 0.0;
    double loss = 0.0;
    std::vector<Matrix<float>> grads;
    Matrix<float> global_sum;
    Matrix<float> local_sum;
    Eigen::Index global_rows = 0;
    Eigen::Index local_rows = 0;
  };
  const std::size_t chunk = static_cast<std::size_t>(config_.chunk_size);
  const std::size_t num_chunks = (n + chunk - 1) / chunk;
  std::vector<ChunkOut> outs(num_chunks);
  try {
    parallel_for(num_chunks, [&](std::size_t c) {
      const std::size_t begin = c * chunk;
      const std::size_t count = std::min(chunk, n - begin);
      const ViewBatch<float> vb =
          assemble_views<float>(std::span<const std::vector<TokenSequence>>(views).subspan(begin, count));
      Graph<float> g;
      const Bound<float> bound(g, online_, true);
      const SslResult<float> r =
          ssl_forward(g, bound, target_, config_.model, config_.ssl, vb, center_global_, center_local_);
      g.backward(r.total);
      ChunkOut& o = outs[c];
      o.weight = static_cast<double>(count) / static_cast<double>(n);
      o.macro = r.macro.value()(0, 0);
      o.micro = r.micro.value()(0, 0);
      o.loss = r.total.value()(0, 0);
      o.grads.resize(online_.size());
      for (std::size_t i = 0; i < online_.size(); ++i) {
        const auto& gr = bound.vars()[i].grad();
        o.grads[i] = gr.size() == 0 ? Matrix<float>::Zero(online_.entries()[i].value.rows(),
                                                          online_.entries()[i].value.cols())
                                    : gr;
      }
      o.global_sum = r.target_global_logits.colwise().sum();
      o.local_sum = r.target_local_logits.colwise().sum();
      o.global_rows = r.target_global_logits.rows();
      o.local_rows = r.target_local_logits.rows();
    });
  } catch (const NumericError& e) {
    throw NumericError("step " + std::to_string(step) + ": " + e.what());
  }

  StepStats stats;
  stats.step = step;
  for (std::size_t i = 0; i < online_.size(); ++i) {
    auto& p = online_.entries()[i];
    p.grad.setZero(p.value.rows(), p.value.cols());
    for (const auto& o : outs) p.grad += static_cast<float>(o.weight) * o.grads[i];
  }
  Matrix<float> global_mean = Matrix<float>::Zero(1, center_global_.cols());
  Matrix<float> local_mean = Matrix<float>::Zero(1, center_local_.cols());
  Eigen::Index global_rows = 0;
  Eigen::Index local_rows = 0;
  for (const auto& o : outs) {
    stats.macro += o.weight * o.macro;
    stats.micro += o.weight * o.micro;
    stats.loss += o.weight * o.loss;
    global_mean += o.global_sum;
    local_mean += o.local_sum;
    global_rows += o.global_rows;
    local_rows += o.local_rows;
  }
  if (!std::isfinite(stats.loss)) throw NumericError("non-finite loss at step " + std::to_string(step));
  global_mean /= static_cast<float>(global_rows);
  local_mean /= static_cast<float>(local_rows);

  stats.lr = lr_at(step);
  stats.weight_decay = weight_decay_at(step);
  stats.kappa = kappa_at(step);
  stats.grad_norm = nn::clip_gradients(online_, config_.clip_norm);
  nn::adamw_step(online_, stats.lr, stats.weight_decay, step + 1);

  const bool frozen = config_.freeze_first_epoch && step < steps_per_epoch_;
  if (!frozen) {
    update_center(center_global_, global_mean, config_.center_momentum);
    update_center(center_local_, local_mean, config_.center_momentum);
    ema_update(target_, online_, stats.kappa);
  }
  ++step_;
  return stats;
}

nn::Checkpoint Trainer::checkpoint() const {
  nn::Checkpoint ckpt;
  nn::append_store(ckpt, "online/", online_, true);
  nn::append_store(ckpt, "target/", target_, false);
  ckpt.tensors.emplace_back("center.global", center_global_);
  ckpt.tensors.emplace_back("center.local", center_local_);
  ckpt.set_counter("step", static_cast<std::uint64_t>(step_));
  ckpt.set_counter("seed", config_.seed);
  append_encoder_config(ckpt, config_.model.encoder);
  return ckpt;
}

void Trainer::restore(const nn::Checkpoint& ckpt) {
  nn::restore_store(ckpt, "online/", online_);
  nn::restore_store(ckpt, "target/", target_);
  const auto& cg = ckpt.tensor("center.global");
  const auto& cl = ckpt.tensor("center.local");
  if (cg.cols() != center_global_.cols() || cl.cols() != center_local_.cols())
    throw Error(ErrorCode::kCheckpoint, "checkpoint centers do not match the prototype dimensions");
  center_global_ = cg;
  center_local_ = cl;
  step_ = static_cast<std::int64_t>(ckpt.counter("step"));
}

namespace {

std::string trace_line(const StepStats& s) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", static_cast<long long>(s.step),
                s.macro, s.micro, s.loss, s.lr, s.weight_decay, s.kappa);
  return buf;
}

constexpr const char* kTraceHeader = "step,L_c,L_s,L_SSL,lr,wd,kappa\n";

}  // namespace

void write_loss_trace(std::ostream& out, std::span<const StepStats> trace) {
  out << kTraceHeader;
  for (const auto& s : trace) out << trace_line(s);
}

PretrainResult pretrain(const Dataset& data, const TrainerConfig& config, const PretrainOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  Trainer trainer(config, data);
  std::int64_t total = trainer.total_steps();
  if (options.max_steps >= 0) total = std::min(total, options.max_steps);
  const bool write = !options.out_dir.empty();
  std::ofstream trace_file;
  if (write) {
    std::filesystem::create_directories(options.out_dir);
    trace_file.open(options.out_dir / "loss_trace.csv", std::ios::binary | std::ios::trunc);
    if (!trace_file) throw Error(ErrorCode::kIo, "cannot write " + (options.out_dir / "loss_trace.csv").string());
    trace_file << kTraceHeader;
  }
  PretrainResult result;
  result.trace.reserve(static_cast<std::size_t>(total));
  for (std::int64_t s = 0; s < total; ++s) {
    const StepStats stats = trainer.step();
    result.trace.push_back(stats);
    if (write) trace_file << trace_line(stats) << std::flush;
    if (options.on_step) options.on_step(stats);
    const std::int64_t done = s + 1;
    if (write && config.checkpoint_every > 0 && done % (trainer.steps_per_epoch() * config.checkpoint_every) == 0)
      nn::save_checkpoint(options.out_dir / ("epoch_" + std::to_string(done / trainer.steps_per_epoch()) + ".ckpt"),
                          trainer.checkpoint());
  }
  result.final_state = trainer.checkpoint();
  result.encoder = encoder_checkpoint(config.model.encoder, trainer.target());
  if (write) {
    nn::save_checkpoint(options.out_dir / "final.ckpt", result.final_state);
    nn::save_checkpoint(options.out_dir / "encoder.ckpt", result.encoder);
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

#define SWIT_INSTANTIATE_TRAINER(T)                                                                                 \
  template void init_model(ParamStore<T>&, const ModelConfig&, Rng&);                                               \
  template void init_attention_pool(ParamStore<T>&, const std::string&, int, int, Rng&);                            \
  template void init_projector(ParamStore<T>&, const std::string&, int, const ProjectorConfig&, int, Rng&);         \
  template Var<T> attention_pool(const Bound<T>&, const std::string&, const Var<T>&, std::span<const int>,          \
                                 Eigen::Index, int, T, T);                                                          \
  template Var<T> projector(const Bound<T>&, const std::string&, const Var<T>&);                                    \
  template Matrix<T> sharpen_center(const Matrix<T>&, double, const Matrix<T>&);                                    \
  template Var<T> global_logits(const Bound<T>&, const ModelConfig&, const Var<T>&, Eigen::Index);                  \
  template Var<T> global_embed_online(const Bound<T>&, const ModelConfig&, const SslConfig&, const Var<T>&,         \
                                      Eigen::Index);                                                                \
  template Matrix<T> global_embed_target(const ParamStore<T>&, const ModelConfig&, const SslConfig&,                \
                                         const Matrix<T>&, Eigen::Index, const Matrix<T>&);                         \
  template Var<T> loss_macro(const Var<T>&, const Matrix<T>&, Eigen::Index);                                        \
  template std::vector<int> neighborhood_topk(const Matrix<T>&, int, int, int);                                     \
  template Matrix<T> micro_target_logits(const ParamStore<T>&, const ModelConfig&, const SslConfig&,                \
                                         const Matrix<T>&, Eigen::Index);                                           \
  template Var<T> micro_online(const Bound<T>&, const ModelConfig&, const SslConfig&, const Var<T>&, Eigen::Index); \
  template Var<T> loss_micro(std::span<const MicroTerms<T>>);                                                       \
  template Var<T> total_loss(const Var<T>&, const Var<T>&, double);                                                 \
  template ViewBatch<T> assemble_views(std::span<const std::vector<TokenSequence>>);                                \
  template SslResult<T> ssl_forward(Graph<T>&, const Bound<T>&, const ParamStore<T>&, const ModelConfig&,           \
                                    const SslConfig&, const ViewBatch<T>&, const Matrix<T>&, const Matrix<T>&);     \
  template void update_center(Matrix<T>&, const Matrix<T>&, double);                                               \
  template void ema_update(ParamStore<T>&, const ParamStore<T>&, double);

SWIT_INSTANTIATE_TRAINER(float)
SWIT_INSTANTIATE_TRAINER(double)

}  // namespace swit
