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

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "swit/augment.hpp"
#include "swit/channel_sim.hpp"
#include "swit/wit_encoder.hpp"

namespace swit {

enum class EvalMode { kLinear, kFinetune, kKnn };
enum class EvalTask { kLocation, kSpot, kPathloss };

const char* eval_mode_name(EvalMode mode);
const char* eval_task_name(EvalTask task);
EvalMode parse_eval_mode(const std::string& text);
EvalTask parse_eval_task(const std::string& text);

struct EvalConfig {
  EvalMode mode = EvalMode::kLinear;
  EvalTask task = EvalTask::kLocation;
  int train_size = 0;  // R; 0 means train_fraction of the dataset
  int test_size = 0;   // R_test; 0 means every sample left after the training split
  double train_fraction = 0.8;
  int linear_epochs = 500;
  int linear_batch = 128;
  int finetune_epochs = 150;
  int finetune_batch = 512;
  int head_hidden = 256;
  double lr = 3e-4;
  double weight_decay = 0.01;
  int k = 20;
  int chunk_size = 64;
  std::uint64_t seed = 1;

  void validate() const;
};

/// mae, p95 and rmse in label units (meters or dB); top1/top5 in percent.
/// Fields that do not apply to a task are NaN.
struct MetricsReport {
  double mae;
  double p95;
  double rmse;
  double top1;
  double top5;
  double runtime;  // seconds
};

MetricsReport empty_report();

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Disjoint stratified draws without replacement. Each stratum contributes
/// train and test counts within one sample of its share; indices are sorted.
Split stratified_split(std::span<const std::uint32_t> strata, std::size_t train_size, std::size_t test_size,
                       std::uint64_t seed);
Split split_for(const Dataset& data, const EvalConfig& config);
std::vector<std::uint32_t> spot_labels(const Dataset& data);

/// Regression targets: (x, y) for location, path loss in dB for pathloss.
Eigen::MatrixXd task_targets(const Dataset& data, EvalTask task);
Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows);

/// Normalized, unaugmented real token sequence of one sample.
TokenSequence prepared_tokens(const ChannelSample& sample, const Normalization& norm);

/// LID representation o_0 of every sample (or of `indices`), one row each.
Eigen::MatrixXd extract_embeddings(const EncoderSnapshot& encoder, const Dataset& data, int chunk_size = 64);
Eigen::MatrixXd extract_embeddings(const EncoderSnapshot& encoder, const Dataset& data,
                                   std::span<const std::size_t> indices, int chunk_size = 64);

/// Per-column affine map of labels onto [0, 1].
struct LabelScaler {
  Eigen::RowVectorXd lo;
  Eigen::RowVectorXd hi;

  static LabelScaler fit(const Eigen::MatrixXd& labels);
  Eigen::MatrixXd scale(const Eigen::MatrixXd& labels) const;
  Eigen::MatrixXd unscale(const Eigen::MatrixXd& scaled) const;
};

/// Euclidean error per row.
std::vector<double> euclidean_errors(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);
/// q-quantile with linear interpolation between order statistics.
double percentile(std::vector<double> values, double q);
MetricsReport metrics(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

struct RegressionResult {
  Eigen::MatrixXd predictions;
  std::vector<double> errors;
  MetricsReport report;
  std::vector<double> epoch_losses;  // mean training loss per epoch, in scaled units
};

/// Single linear layer on frozen embeddings, AdamW at a fixed rate, MSE on labels scaled to [0, 1].
RegressionResult linear_probe(const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_y,
                              const Eigen::MatrixXd& test_x, const Eigen::MatrixXd& test_y, const EvalConfig& config);

/// Encoder plus a fresh hidden-layer head trained jointly; test predictions use batch size 1.
RegressionResult fine_tune(const EncoderSnapshot& init, const Dataset& data, const Split& split, EvalTask task,
                           const EvalConfig& config);

struct KnnResult {
  double top1 = 0.0;  // percent
  double top5 = 0.0;  // percent
  std::vector<std::uint32_t> predictions;
};

/// Cosine-similarity k-NN with vote weight max(cos, 0); ties go to the lower class index.
KnnResult knn_eval(const Eigen::MatrixXd& train_x, std::span<const std::uint32_t> train_labels,
                   const Eigen::MatrixXd& test_x, std::span<const std::uint32_t> test_labels, int k, int num_classes);

/// Linear probe on frozen embeddings predicting path loss in dB; 0.8/0.2 split.
RegressionResult pathloss_transfer(const EncoderSnapshot& encoder, const Dataset& data, const EvalConfig& config);

struct ReportRow {
  std::string run;
  std::string mode;
  std::string task;
  MetricsReport metrics;
};

/// Header run,mode,task,mae,p95,rmse,top1,top5; NaN fields are left empty. Runtime is not written.
void write_metrics_csv(std::ostream& out, std::span<const ReportRow> rows);
std::vector<ReportRow> read_metrics_csv(std::istream& in);
/// Header index,error,pred_0..,truth_0..
void write_errors_csv(std::ostream& out, std::span<const std::size_t> indices, const Eigen::MatrixXd& pred,
                      const Eigen::MatrixXd& truth);

}  // namespace swit
