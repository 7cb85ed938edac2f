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

#include "swit/eval_harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "swit/augment.hpp"
#include "swit/nn/optim.hpp"
#include "swit/parallel.hpp"

namespace swit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const char* eval_mode_name(EvalMode mode) {
  switch (mode) {
    case EvalMode::kLinear: return "linear";
    case EvalMode::kFinetune: return "finetune";
    case EvalMode::kKnn: return "knn";
  }
  return "?";
}

const char* eval_task_name(EvalTask task) {
  switch (task) {
    case EvalTask::kLocation: return "location";
    case EvalTask::kSpot: return "spot";
    case EvalTask::kPathloss: return "pathloss";
  }
  return "?";
}

EvalMode parse_eval_mode(const std::string& text) {
  if (text == "linear") return EvalMode::kLinear;
  if (text == "finetune") return EvalMode::kFinetune;
  if (text == "knn") return EvalMode::kKnn;
  throw Error(ErrorCode::kConfig, "unknown eval mode '" + text + "'");
}

EvalTask parse_eval_task(const std::string& text) {
  if (text == "location") return EvalTask::kLocation;
  if (text == "spot") return EvalTask::kSpot;
  if (text == "pathloss") return EvalTask::kPathloss;
  throw Error(ErrorCode::kConfig, "unknown eval task '" + text + "'");
}

void EvalConfig::validate() const {
  if (train_size < 0 || test_size < 0) throw InvalidArgument("eval: split sizes must be >= 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidArgument("eval: train_fraction outside (0, 1)");
  if (linear_epochs < 0 || finetune_epochs < 0) throw InvalidArgument("eval: epochs must be >= 0");
  if (linear_batch < 1 || finetune_batch < 1 || chunk_size < 1) throw InvalidArgument("eval: batch sizes must be >= 1");
  if (head_hidden < 1) throw InvalidArgument("eval: head_hidden must be >= 1");
  if (!(lr > 0.0) || weight_decay < 0.0) throw InvalidArgument("eval: lr must be > 0 and weight_decay >= 0");
  if (k < 1) throw InvalidArgument("eval: k must be >= 1");
}

MetricsReport empty_report() { return {kNaN, kNaN, kNaN, kNaN, kNaN, 0.0}; }

namespace {

/// Largest-remainder apportionment of `total` over strata sizes, capped by `room`.
std::vector<std::size_t> apportion(const std::vector<std::size_t>& sizes, const std::vector<std::size_t>& room,
                                   std::size_t population, std::size_t total) {
  const std::size_t n = sizes.size();
  std::vector<std::size_t> quota(n);
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const double exact = static_cast<double>(sizes[s]) * static_cast<double>(total) / static_cast<double>(population);
    quota[s] = std::min(room[s], static_cast<std::size_t>(std::floor(exact)));
    assigned += quota[s];
    rem.emplace_back(exact - std::floor(exact), s);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t pass = 0; assigned < total && pass < 2 * n + 2; ++pass) {
    for (const auto& [frac, s] : rem) {
      if (assigned == total) break;
      if (quota[s] < room[s] && (pass > 0 || frac > 0.0)) {
        ++quota[s];
        ++assigned;
      }
    }
  }
  if (assigned != total) throw InvalidArgument("stratified_split: not enough samples for the requested split");
  return quota;
}

}  // namespace

Split stratified_split(std::span<const std::uint32_t> strata, std::size_t train_size, std::size_t test_size,
                       std::uint64_t seed) {
  const std::size_t population = strata.size();
  if (train_size == 0 || test_size == 0) throw InvalidArgument("stratified_split: split sizes must be positive");
  if (train_size + test_size > population)
    throw InvalidArgument("stratified_split: train + test exceeds the dataset size");
  std::uint32_t max_label = 0;
  for (const auto s : strata) max_label = std::max(max_label, s);
  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(max_label) + 1);
  for (std::size_t i = 0; i < population; ++i) groups[strata[i]].push_back(i);
  const Rng root = Rng(seed).derive("split");
  for (std::size_t s = 0; s < groups.size(); ++s) {
    Rng rng = root.derive(static_cast<std::uint64_t>(s));
    auto& g = groups[s];
    for (std::size_t i = g.size(); i > 1; --i)
      std::swap(g[i - 1], g[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1))]);
  }
  std::vector<std::size_t> sizes(groups.size());
  for (std::size_t s = 0; s < groups.size(); ++s) sizes[s] = groups[s].size();
  const std::vector<std::size_t> train_q = apportion(sizes, sizes, population, train_size);
  std::vector<std::size_t> room(groups.size());
  for (std::size_t s = 0; s < groups.size(); ++s) room[s] = sizes[s] - train_q[s];
  const std::vector<std::size_t> test_q = apportion(sizes, room, population, test_size);
  Split split;
  for (std::size_t s = 0; s < groups.size(); ++s) {
    const auto& g = groups[s];
    split.train.insert(split.train.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(train_q[s]));
    split.test.insert(split.test.end(), g.begin() + static_cast<std::ptrdiff_t>(train_q[s]),
                      g.begin() + static_cast<std::ptrdiff_t>(train_q[s] + test_q[s]));
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<std::uint32_t> spot_labels(const Dataset& data) {
  std::vector<std::uint32_t> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = data.samples[i].spot_label;
  return out;
}

Split split_for(const Dataset& data, const EvalConfig& config) {
  config.validate();
  const std::size_t n = data.size();
  const std::size_t train = config.train_size > 0
                                ? static_cast<std::size_t>(config.train_size)
                                : static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(n)));
  const std::size_t test = config.test_size > 0 ? static_cast<std::size_t>(config.test_size) : n - std::min(n, train);
  const std::vector<std::uint32_t> strata = spot_labels(data);
  return stratified_split(strata, train, test, config.seed);
}

Eigen::MatrixXd task_targets(const Dataset& data, EvalTask task) {
  Eigen::MatrixXd y;
  switch (task) {
    case EvalTask::kLocation:
      y.resize(static_cast<Eigen::Index>(data.size()), 2);
      for (std::size_t i = 0; i < data.size(); ++i) {
        y(static_cast<Eigen::Index>(i), 0) = data.samples[i].position[0];
        y(static_cast<Eigen::Index>(i), 1) = data.samples[i].position[1];
      }
      return y;
    case EvalTask::kPathloss:
      y.resize(static_cast<Eigen::Index>(data.size()), 1);
      for (std::size_t i = 0; i < data.size(); ++i) y(static_cast<Eigen::Index>(i), 0) = data.samples[i].pathloss_db;
      return y;
    case EvalTask::kSpot:
      break;
  }
  throw InvalidArgument("task_targets: spot labels are categorical");
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

TokenSequence prepared_tokens(const ChannelSample& sample, const Normalization& norm) {
  return normalize(to_real_repr(sample.channel), norm);
}

namespace {

Matrix<float> stacked_tokens(const Dataset& data, std::span<const std::size_t> indices, std::size_t begin,
                             std::size_t count) {
  const TokenSequence first = prepared_tokens(data.samples[indices[begin]], data.norm);
  const Eigen::Index len = first.length();
  Matrix<float> out(static_cast<Eigen::Index>(count) * len, first.width());
  for (std::size_t i = 0; i < count; ++i) {
    const TokenSequence t = i == 0 ? first : prepared_tokens(data.samples[indices[begin + i]], data.norm);
    out.middleRows(static_cast<Eigen::Index>(i) * len, len) = t.tokens.cast<float>();
  }
  return out;
}

void check_encoder_fits(const EncoderSnapshot& encoder, const Dataset& data) {
  if (encoder.config.token_width != 3 * data.num_antennas)
    throw ShapeMismatch("encoder token width " + std::to_string(encoder.config.token_width) +
                        " does not match dataset with " + std::to_string(data.num_antennas) + " antennas");
  if (data.num_subcarriers + 1 > encoder.config.max_positions)
    throw ShapeMismatch("dataset has more subcarriers than the encoder's positional table");
}

}  // namespace

Eigen::MatrixXd extract_embeddings(const EncoderSnapshot& encoder, const Dataset& data, int chunk_size) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return extract_embeddings(encoder, data, all, chunk_size);
}

Eigen::MatrixXd extract_embeddings(const EncoderSnapshot& encoder, const Dataset& data,
                                   std::span<const std::size_t> indices, int chunk_size) {
  check_encoder_fits(encoder, data);
  if (chunk_size < 1) throw InvalidArgument("extract_embeddings: chunk_size must be >= 1");
  const std::size_t n = indices.size();
  const std::size_t chunk = static_cast<std::size_t>(chunk_size);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), encoder.config.embed_dim);
  parallel_for((n + chunk - 1) / chunk, [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    const std::size_t count = std::min(chunk, n - begin);
    Graph<float> g;
    const Bound<float> params(g, encoder.params, false);
    const Var<float> enc = encode(g, params, encoder.config, stacked_tokens(data, indices, begin, count),
                                  static_cast<Eigen::Index>(count));
    const Var<float> lid = lid_rows(enc, static_cast<Eigen::Index>(count));
    out.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count)) = lid.value().cast<double>();
  });
  return out;
}

LabelScaler LabelScaler::fit(const Eigen::MatrixXd& labels) {
  if (labels.rows() < 1) throw InvalidArgument("LabelScaler: no labels");
  LabelScaler s;
  s.lo = labels.colwise().minCoeff();
  s.hi = labels.colwise().maxCoeff();
  for (Eigen::Index j = 0; j < labels.cols(); ++j)
    if (!(s.hi(j) - s.lo(j) > 0.0) || !std::isfinite(s.hi(j) - s.lo(j)))
      throw InvalidArgument("LabelScaler: degenerate label range in column " + std::to_string(j));
  return s;
}

Eigen::MatrixXd LabelScaler::scale(const Eigen::MatrixXd& labels) const {
  return (labels.rowwise() - lo).array().rowwise() / (hi - lo).array();
}

Eigen::MatrixXd LabelScaler::unscale(const Eigen::MatrixXd& scaled) const {
  return (scaled.array().rowwise() * (hi - lo).array()).matrix().rowwise() + lo;
}

std::vector<double> euclidean_errors(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw ShapeMismatch("metrics: prediction and truth shapes differ");
  std::vector<double> e(static_cast<std::size_t>(pred.rows()));
  for (Eigen::Index i = 0; i < pred.rows(); ++i) e[static_cast<std::size_t>(i)] = (pred.row(i) - truth.row(i)).norm();
  return e;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile: no values");
  if (q < 0.0 || q > 1.0) throw InvalidArgument("percentile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

MetricsReport metrics(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  const std::vector<double> e = euclidean_errors(pred, truth);
  if (e.empty()) throw InvalidArgument("metrics: no samples");
  MetricsReport r = empty_report();
  double sum = 0.0;
  double sq = 0.0;
  for (const double v : e) {
    sum += v;
    sq += v * v;
  }
  r.mae = sum / static_cast<double>(e.size());
  r.rmse = std::sqrt(sq / static_cast<double>(e.size()));
  r.p95 = percentile(e, 0.95);
  return r;
}

namespace {

/// Mean squared error over every entry of pred - target.
template <typename T>
Var<T> mse(const Var<T>& pred, const Matrix<T>& target) {
  Graph<T>& g = *pred.graph();
  const Var<T> diff = nn::sub(pred, g.constant(target));
  return nn::mean(nn::mul(diff, diff));
}

std::vector<std::size_t> shuffled(std::size_t n, Rng rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i)
    std::swap(p[i - 1], p[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1))]);
  return p;
}

}  // namespace

RegressionResult linear_probe(const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_y,
                              const Eigen::MatrixXd& test_x, const Eigen::MatrixXd& test_y, const EvalConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  if (train_x.rows() != train_y.rows() || test_x.rows() != test_y.rows() || train_x.cols() != test_x.cols() ||
      train_y.cols() != test_y.cols())
    throw ShapeMismatch("linear_probe: feature and label shapes disagree");
  const LabelScaler scaler = LabelScaler::fit(train_y);
  const Matrix<double> xs = train_x;
  const Matrix<double> ys = scaler.scale(train_y);
  const HeadConfig head{static_cast<int>(train_x.cols()), static_cast<int>(train_y.cols()), 0};
  ParamStore<double> store;
  Rng init = Rng(config.seed).derive("head");
  init_head(store, head, init);

  RegressionResult result;
  const std::size_t n = static_cast<std::size_t>(train_x.rows());
  const std::size_t batch = static_cast<std::size_t>(config.linear_batch);
  const Rng shuffle_root = Rng(config.seed).derive("eval");
  std::int64_t step = 0;
  for (int epoch = 0; epoch < config.linear_epochs; ++epoch) {
    const std::vector<std::size_t> order = shuffled(n, shuffle_root.derive(static_cast<std::uint64_t>(epoch)));
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::size_t count = std::min(batch, n - begin);
      Matrix<double> bx(static_cast<Eigen::Index>(count), xs.cols());
      Matrix<double> by(static_cast<Eigen::Index>(count), ys.cols());
      for (std::size_t i = 0; i < count; ++i) {
        bx.row(static_cast<Eigen::Index>(i)) = xs.row(static_cast<Eigen::Index>(order[begin + i]));
        by.row(static_cast<Eigen::Index>(i)) = ys.row(static_cast<Eigen::Index>(order[begin + i]));
      }
      Graph<double> g;
      const Bound<double> params(g, store, true);
      const Var<double> loss = mse(mlp_head(params, head, g.constant(bx)), by);
      g.backward(loss);
      params.collect_grads(store);
      nn::adamw_step(store, config.lr, config.weight_decay, ++step);
      epoch_loss += loss.value()(0, 0) * static_cast<double>(count);
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(n));
  }

  Graph<double> g;
  const Bound<double> params(g, store, false);
  const Matrix<double> tx = test_x;
  const Eigen::MatrixXd scaled = mlp_head(params, head, g.constant(tx)).value();
  result.predictions = scaler.unscale(scaled);
  result.errors = euclidean_errors(result.predictions, test_y);
  result.report = metrics(result.predictions, test_y);
  result.report.runtime = seconds_since(t0);
  return result;
}

RegressionResult fine_tune(const EncoderSnapshot& init, const Dataset& data, const Split& split, EvalTask task,
                           const EvalConfig& config) {
  config.validate();
  check_encoder_fits(init, data);
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::MatrixXd targets = task_targets(data, task);
  const Eigen::MatrixXd train_y = select_rows(targets, split.train);
  const Eigen::MatrixXd test_y = select_rows(targets, split.test);
  const LabelScaler scaler = LabelScaler::fit(train_y);
  const Matrix<float> ys = scaler.scale(train_y).cast<float>();

  ParamStore<float> store = init.params;
  const HeadConfig head{init.config.embed_dim, static_cast<int>(targets.cols()), config.head_hidden};
  Rng head_rng = Rng(config.seed).derive("head");
  init_head(store, head, head_rng);
  for (auto& p : store.entries()) {
    p.m.setZero();
    p.v.setZero();
  }

  RegressionResult result;
  const std::size_t n = split.train.size();
  const std::size_t batch = static_cast<std::size_t>(config.finetune_batch);
  const std::size_t chunk = static_cast<std::size_t>(config.chunk_size);
  const Rng shuffle_root = Rng(config.seed).derive("eval");
  std::int64_t step = 0;
  for (int epoch = 0; epoch < config.finetune_epochs; ++epoch) {
    const std::vector<std::size_t> order = shuffled(n, shuffle_root.derive(static_cast<std::uint64_t>(epoch)));
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::size_t count = std::min(batch, n - begin);
      std::vector<std::size_t> members(count);
      for (std::size_t i = 0; i < count; ++i) members[i] = split.train[order[begin + i]];
      const std::size_t num_chunks = (count + chunk - 1) / chunk;
      std::vector<std::vector<Matrix<float>>> grads(num_chunks);
      std::vector<double> losses(num_chunks);
      parallel_for(num_chunks, [&](std::size_t c) {
        const std::size_t cb = c * chunk;
        const std::size_t cn = std::min(chunk, count - cb);
        Matrix<float> by(static_cast<Eigen::Index>(cn), ys.cols());
        for (std::size_t i = 0; i < cn; ++i) by.row(static_cast<Eigen::Index>(i)) = ys.row(static_cast<Eigen::Index>(order[begin + cb + i]));
        Graph<float> g;
        const Bound<float> params(g, store, true);
        const Var<float> enc = encode(g, params, init.config, stacked_tokens(data, members, cb, cn),
                                      static_cast<Eigen::Index>(cn));
        const Var<float> pred = mlp_head(params, head, lid_rows(enc, static_cast<Eigen::Index>(cn)));
        const Var<float> loss =
            nn::scale(mse(pred, by), static_cast<float>(static_cast<double>(cn) / static_cast<double>(count)));
        g.backward(loss);
        losses[c] = loss.value()(0, 0);
        grads[c].resize(store.size());
        for (std::size_t i = 0; i < store.size(); ++i) {
          const auto& gr = params.vars()[i].grad();
          grads[c][i] = gr.size() == 0 ? Matrix<float>::Zero(store.entries()[i].value.rows(), store.entries()[i].value.cols())
                                       : gr;
        }
      });
      double batch_loss = 0.0;
      for (std::size_t i = 0; i < store.size(); ++i) {
        auto& p = store.entries()[i];
        p.grad.setZero(p.value.rows(), p.value.cols());
        for (std::size_t c = 0; c < num_chunks; ++c) p.grad += grads[c][i];
      }
      for (const double l : losses) batch_loss += l;
      if (!std::isfinite(batch_loss)) throw NumericError("fine_tune: non-finite loss at epoch " + std::to_string(epoch));
      nn::adamw_step(store, config.lr, config.weight_decay, ++step);
      epoch_loss += batch_loss * static_cast<double>(count);
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(n));
  }

  Eigen::MatrixXd scaled(static_cast<Eigen::Index>(split.test.size()), targets.cols());
  parallel_for(split.test.size(), [&](std::size_t i) {
    Graph<float> g;
    const Bound<float> params(g, store, false);
    const Var<float> enc = encode(g, params, init.config, stacked_tokens(data, split.test, i, 1), 1);
    scaled.row(static_cast<Eigen::Index>(i)) = mlp_head(params, head, lid_rows(enc, 1)).value().cast<double>();
  });
  result.predictions = scaler.unscale(scaled);
  result.errors = euclidean_errors(result.predictions, test_y);
  result.report = metrics(result.predictions, test_y);
  result.report.runtime = seconds_since(t0);
  return result;
}

KnnResult knn_eval(const Eigen::MatrixXd& train_x, std::span<const std::uint32_t> train_labels,
                   const Eigen::MatrixXd& test_x, std::span<const std::uint32_t> test_labels, int k, int num_classes) {
  if (k < 1) throw InvalidArgument("knn: k must be >= 1");
  if (static_cast<std::size_t>(k) > static_cast<std::size_t>(train_x.rows()))
    throw InvalidArgument("knn: k exceeds the training set size");
  if (static_cast<std::size_t>(train_x.rows()) != train_labels.size() ||
      static_cast<std::size_t>(test_x.rows()) != test_labels.size() || train_x.cols() != test_x.cols())
    throw ShapeMismatch("knn: embedding and label counts disagree");
  if (num_classes < 1) throw InvalidArgument("knn: num_classes must be >= 1");
  for (const auto l : train_labels)
    if (l >= static_cast<std::uint32_t>(num_classes)) throw InvalidArgument("knn: label out of range");

  auto unit_rows = [](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd u = m;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double nrm = u.row(i).norm();
      if (nrm > 0.0) u.row(i) /= nrm;
    }
    return u;
  };
  const Eigen::MatrixXd tr = unit_rows(train_x);
  const Eigen::MatrixXd te = unit_rows(test_x);
  const std::size_t n_test = test_labels.size();
  KnnResult result;
  result.predictions.resize(n_test);
  std::vector<char> hit1(n_test, 0);
  std::vector<char> hit5(n_test, 0);
  parallel_for(n_test, [&](std::size_t q) {
    const Eigen::VectorXd sims = tr * te.row(static_cast<Eigen::Index>(q)).transpose();
    std::vector<int> idx(static_cast<std::size_t>(sims.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
      return sims(a) > sims(b) || (sims(a) == sims(b) && a < b);
    });
    std::vector<double> votes(static_cast<std::size_t>(num_classes), 0.0);
    for (int j = 0; j < k; ++j) {
      const int t = idx[static_cast<std::size_t>(j)];
      votes[train_labels[static_cast<std::size_t>(t)]] += std::max(sims(t), 0.0);
    }
    std::vector<int> rank(static_cast<std::size_t>(num_classes));
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](int a, int b) {
      return votes[static_cast<std::size_t>(a)] > votes[static_cast<std::size_t>(b)];
    });
    const auto truth = static_cast<int>(test_labels[q]);
    result.predictions[q] = static_cast<std::uint32_t>(rank[0]);
    hit1[q] = rank[0] == truth;
    for (int j = 0; j < std::min(5, num_classes); ++j)
      if (rank[static_cast<std::size_t>(j)] == truth) hit5[q] = 1;
  });
  const double denom = n_test > 0 ? static_cast<double>(n_test) : 1.0;
  result.top1 = 100.0 * static_cast<double>(std::count(hit1.begin(), hit1.end(), 1)) / denom;
  result.top5 = 100.0 * static_cast<double>(std::count(hit5.begin(), hit5.end(), 1)) / denom;
  return result;
}

RegressionResult pathloss_transfer(const EncoderSnapshot& encoder, const Dataset& data, const EvalConfig& config) {
  EvalConfig cfg = config;
  cfg.task = EvalTask::kPathloss;
  cfg.train_size = 0;
  cfg.test_size = 0;
  cfg.train_fraction = 0.8;
  const Split split = split_for(data, cfg);
  const Eigen::MatrixXd emb = extract_embeddings(encoder, data, cfg.chunk_size);
  const Eigen::MatrixXd y = task_targets(data, EvalTask::kPathloss);
  return linear_probe(select_rows(emb, split.train), select_rows(y, split.train), select_rows(emb, split.test),
                      select_rows(y, split.test), cfg);
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

double parse_field(const std::string& s) {
  if (s.empty()) return kNaN;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, "metrics csv: bad number '" + s + "'");
  }
}

constexpr const char* kMetricsHeader = "run,mode,task,mae,p95,rmse,top1,top5";

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const ReportRow> rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows)
    out << r.run << ',' << r.mode << ',' << r.task << ',' << fmt(r.metrics.mae) << ',' << fmt(r.metrics.p95) << ','
        << fmt(r.metrics.rmse) << ',' << fmt(r.metrics.top1) << ',' << fmt(r.metrics.top5) << '\n';
}

std::vector<ReportRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader)
    throw Error(ErrorCode::kConfig, "metrics csv: unexpected header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 8) throw Error(ErrorCode::kConfig, "metrics csv: expected 8 fields in '" + line + "'");
    ReportRow r{f[0], f[1], f[2], empty_report()};
    r.metrics.mae = parse_field(f[3]);
    r.metrics.p95 = parse_field(f[4]);
    r.metrics.rmse = parse_field(f[5]);
    r.metrics.top1 = parse_field(f[6]);
    r.metrics.top5 = parse_field(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_errors_csv(std::ostream& out, std::span<const std::size_t> indices, const Eigen::MatrixXd& pred,
                      const Eigen::MatrixXd& truth) {
  const std::vector<double> e = euclidean_errors(pred, truth);
  if (indices.size() != e.size()) throw ShapeMismatch("errors csv: index count differs from predictions");
  out << "index,error";
  for (Eigen::Index j = 0; j < pred.cols(); ++j) out << ",pred_" << j;
  for (Eigen::Index j = 0; j < truth.cols(); ++j) out << ",truth_" << j;
  out << '\n';
  for (std::size_t i = 0; i < e.size(); ++i) {
    out << indices[i] << ',' << fmt(e[i]);
    for (Eigen::Index j = 0; j < pred.cols(); ++j) out << ',' << fmt(pred(static_cast<Eigen::Index>(i), j));
    for (Eigen::Index j = 0; j < truth.cols(); ++j) out << ',' << fmt(truth(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
}

}  // namespace swit
