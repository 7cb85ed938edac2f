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

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "swit/channel_sim.hpp"
#include "swit/dataset_io.hpp"
#include "swit/eval_harness.hpp"
#include "swit/nn/checkpoint.hpp"
#include "swit/run_config.hpp"
#include "swit/swit_trainer.hpp"
#include "swit/wit_encoder.hpp"

namespace fs = std::filesystem;
using namespace swit;

namespace {

enum Exit : int {
  kOk = 0,
  kOther = 1,
  kUsage = 2,
  kMissingFile = 3,
  kParse = 4,
  kShape = 5,
  kNumericAbort = 6,
  kBadArgument = 7,
  kGeometry = 8,
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return kMissingFile;
    case ErrorCode::kConfig:
    case ErrorCode::kDatasetFormat:
    case ErrorCode::kDatasetVersion:
    case ErrorCode::kDatasetTruncated:
    case ErrorCode::kDatasetHeader:
    case ErrorCode::kCheckpoint: return kParse;
    case ErrorCode::kShapeMismatch: return kShape;
    case ErrorCode::kNumeric: return kNumericAbort;
    case ErrorCode::kInvalidArgument: return kBadArgument;
    case ErrorCode::kDegenerateGeometry: return kGeometry;
  }
  return kOther;
}

int report_error(const std::string& kind, int code, const std::string& message) {
  nlohmann::json j{{"error", kind}, {"exit_code", code}, {"message", message}};
  std::cerr << j.dump() << std::endl;
  return code;
}

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string data;
  std::string ckpt;
  std::string out;
  std::string name;
};

RunConfig resolve_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kConfig, "config: --set expects key=value, got '" + kv + "'");
    set_run_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.apply_seed();
  cfg.validate();
  return cfg;
}

fs::path out_dir(const Common& c, const RunConfig& cfg) { return c.out.empty() ? fs::path(cfg.out_dir) : fs::path(c.out); }

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

void write_runtime(const fs::path& dir, const std::string& command, double seconds) {
  auto out = open_out(dir / "runtime.log");
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << command << " finished " << stamp << " after " << seconds << " s\n";
}

EncoderSnapshot load_encoder(const std::string& path) { return load_encoder_snapshot(nn::load_checkpoint(path)); }

void check_widths(const EncoderSnapshot& enc, const Dataset& data) {
  if (enc.config.token_width != 3 * data.num_antennas)
    throw ShapeMismatch("encoder expects token width " + std::to_string(enc.config.token_width) + ", dataset has " +
                        std::to_string(3 * data.num_antennas));
}

void emit_metrics(const fs::path& dir, const std::string& run, const EvalConfig& eval, const MetricsReport& report) {
  ReportRow row{run, eval_mode_name(eval.mode), eval_task_name(eval.task), report};
  auto out = open_out(dir / "metrics.csv");
  write_metrics_csv(out, std::span<const ReportRow>(&row, 1));
  write_metrics_csv(std::cout, std::span<const ReportRow>(&row, 1));
}

std::string run_name(const Common& c, const std::string& fallback) { return c.name.empty() ? fallback : c.name; }

int cmd_gen_data(const Common& c) {
  const RunConfig cfg = resolve_config(c);
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = generate_dataset(cfg.scenario);
  const fs::path path = c.out;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_dataset(path, data);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "wrote " << data.size() << " samples (" << data.num_antennas << " antennas x " << data.num_subcarriers
            << " subcarriers) to " << path.string() << " in " << secs << " s\n";
  return kOk;
}

int cmd_pretrain(const Common& c) {
  RunConfig cfg = resolve_config(c);
  const Dataset data = load_dataset(c.data);
  cfg.train.model.encoder.token_width = 3 * data.num_antennas;
  cfg.train.validate();
  const fs::path dir = out_dir(c, cfg);
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "config.txt");
    out << serialize_run_config(cfg);
  }
  PretrainOptions options;
  options.out_dir = dir;
  std::int64_t total = 0;
  options.on_step = [&](const StepStats& s) {
    if (s.step % 32 == 0 || s.step + 1 == total)
      std::fprintf(stderr, "step %lld loss %.6f macro %.6f micro %.6f lr %.3g\n", static_cast<long long>(s.step),
                   s.loss, s.macro, s.micro, s.lr);
  };
  total = static_cast<std::int64_t>((data.size() + cfg.train.batch_size - 1) / cfg.train.batch_size) * cfg.train.epochs;
  const PretrainResult result = pretrain(data, cfg.train, options);
  write_runtime(dir, "pretrain", result.seconds);
  std::cout << "pretrained " << result.trace.size() << " steps; encoder at " << (dir / "encoder.ckpt").string() << "\n";
  return kOk;
}

int cmd_linear_eval(const Common& c, const std::string& task) {
  RunConfig cfg = resolve_config(c);
  cfg.eval.mode = EvalMode::kLinear;
  cfg.eval.task = parse_eval_task(task);
  if (cfg.eval.task == EvalTask::kSpot) throw InvalidArgument("linear-eval supports location and pathloss; use knn for spot");
  const Dataset data = load_dataset(c.data);
  const EncoderSnapshot enc = load_encoder(c.ckpt);
  check_widths(enc, data);
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = out_dir(c, cfg);
  Split split = split_for(data, cfg.eval);
  RegressionResult res;
  if (cfg.eval.task == EvalTask::kPathloss) {
    res = pathloss_transfer(enc, data, cfg.eval);
    EvalConfig forced = cfg.eval;
    forced.train_size = 0;
    forced.test_size = 0;
    forced.train_fraction = 0.8;
    split = split_for(data, forced);
  } else {
    const Eigen::MatrixXd emb = extract_embeddings(enc, data, cfg.eval.chunk_size);
    const Eigen::MatrixXd y = task_targets(data, cfg.eval.task);
    res = linear_probe(select_rows(emb, split.train), select_rows(y, split.train), select_rows(emb, split.test),
                       select_rows(y, split.test), cfg.eval);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.report.runtime = secs;
  emit_metrics(dir, run_name(c, fs::path(c.ckpt).stem().string()), cfg.eval, res.report);
  auto err = open_out(dir / "errors.csv");
  write_errors_csv(err, split.test, res.predictions, select_rows(task_targets(data, cfg.eval.task), split.test));
  write_runtime(dir, "linear-eval", secs);
  return kOk;
}

int cmd_finetune(const Common& c, bool random_init, const std::string& task) {
  RunConfig cfg = resolve_config(c);
  cfg.eval.mode = EvalMode::kFinetune;
  cfg.eval.task = parse_eval_task(task);
  if (cfg.eval.task == EvalTask::kSpot) throw InvalidArgument("finetune supports location and pathloss");
  const Dataset data = load_dataset(c.data);
  EncoderSnapshot enc;
  if (random_init) {
    EncoderConfig ec = cfg.train.model.encoder;
    ec.token_width = 3 * data.num_antennas;
    enc = random_encoder(ec, cfg.seed);
  } else {
    enc = load_encoder(c.ckpt);
  }
  check_widths(enc, data);
  const auto t0 = std::chrono::steady_clock::now();
  const Split split = split_for(data, cfg.eval);
  RegressionResult res = fine_tune(enc, data, split, cfg.eval.task, cfg.eval);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.report.runtime = secs;
  const fs::path dir = out_dir(c, cfg);
  emit_metrics(dir, run_name(c, random_init ? "random-init" : fs::path(c.ckpt).stem().string()), cfg.eval, res.report);
  auto err = open_out(dir / "errors.csv");
  write_errors_csv(err, split.test, res.predictions, select_rows(task_targets(data, cfg.eval.task), split.test));
  write_runtime(dir, "finetune", secs);
  return kOk;
}

int cmd_knn(const Common& c, int k) {
  RunConfig cfg = resolve_config(c);
  cfg.eval.mode = EvalMode::kKnn;
  cfg.eval.task = EvalTask::kSpot;
  if (k > 0) cfg.eval.k = k;
  cfg.eval.validate();
  const Dataset data = load_dataset(c.data);
  const EncoderSnapshot enc = load_encoder(c.ckpt);
  check_widths(enc, data);
  const auto t0 = std::chrono::steady_clock::now();
  const Split split = split_for(data, cfg.eval);
  const Eigen::MatrixXd emb = extract_embeddings(enc, data, cfg.eval.chunk_size);
  const auto labels = spot_labels(data);
  std::vector<std::uint32_t> train_y, test_y;
  for (auto i : split.train) train_y.push_back(labels[i]);
  for (auto i : split.test) test_y.push_back(labels[i]);
  const KnnResult res =
      knn_eval(select_rows(emb, split.train), train_y, select_rows(emb, split.test), test_y, cfg.eval.k, data.spot_count);
  MetricsReport report = empty_report();
  report.top1 = res.top1;
  report.top5 = res.top5;
  report.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const fs::path dir = out_dir(c, cfg);
  emit_metrics(dir, run_name(c, fs::path(c.ckpt).stem().string()), cfg.eval, report);
  write_runtime(dir, "knn", report.runtime);
  return kOk;
}

int cmd_export(const Common& c) {
  RunConfig cfg = resolve_config(c);
  const Dataset data = load_dataset(c.data);
  const EncoderSnapshot enc = load_encoder(c.ckpt);
  check_widths(enc, data);
  const Eigen::MatrixXd emb = extract_embeddings(enc, data, cfg.eval.chunk_size);
  auto out = open_out(c.out);
  out << "index,spot,x,y,z,pathloss_db";
  for (Eigen::Index j = 0; j < emb.cols(); ++j) out << ",e" << j;
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    out << i << "," << s.spot_label;
    for (float p : s.position) {
      std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(p));
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(s.pathloss_db));
    out << buf;
    for (Eigen::Index j = 0; j < emb.cols(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.9g", emb(static_cast<Eigen::Index>(i), j));
      out << buf;
    }
    out << "\n";
  }
  std::cout << "wrote " << emb.rows() << " x " << emb.cols() << " embeddings to " << c.out << "\n";
  return kOk;
}

int cmd_report(const std::vector<std::string>& runs, const std::string& out_path) {
  std::vector<ReportRow> merged;
  for (const auto& r : runs) {
    fs::path p = r;
    if (fs::is_directory(p)) p /= "metrics.csv";
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "report: cannot open " + p.string());
    for (auto& row : read_metrics_csv(in)) merged.push_back(std::move(row));
  }
  auto out = open_out(out_path);
  write_metrics_csv(out, merged);
  write_metrics_csv(std::cout, merged);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised wireless channel representation learning"};
  app.require_subcommand(1);
  Common common;
  std::string task = "location";
  int k = 0;
  std::vector<std::string> runs;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "key = value run config");
    sub->add_option("--set", common.overrides, "override one config key (key=value), repeatable");
  };

  auto* gen = app.add_subcommand("gen-data", "simulate a channel dataset");
  add_config(gen);
  gen->add_option("--out", common.out, "dataset file")->required();

  auto* pre = app.add_subcommand("pretrain", "self-supervised pretraining");
  add_config(pre);
  pre->add_option("--data", common.data, "dataset file")->required();
  pre->add_option("--out", common.out, "output directory");

  auto* lin = app.add_subcommand("linear-eval", "linear probe on frozen embeddings");
  add_config(lin);
  lin->add_option("--ckpt", common.ckpt, "encoder checkpoint")->required();
  lin->add_option("--data", common.data, "dataset file")->required();
  lin->add_option("--task", task, "location or pathloss");
  lin->add_option("--out", common.out, "output directory");
  lin->add_option("--name", common.name, "run label in metrics.csv");

  auto* ft = app.add_subcommand("finetune", "train encoder and head end to end");
  add_config(ft);
  auto* ft_ckpt = ft->add_option("--ckpt", common.ckpt, "encoder checkpoint");
  bool random_init = false;
  auto* ft_rand = ft->add_flag("--random-init", random_init, "start from a randomly initialised encoder");
  ft_ckpt->excludes(ft_rand);
  ft->add_option("--data", common.data, "dataset file")->required();
  ft->add_option("--task", task, "location or pathloss");
  ft->add_option("--out", common.out, "output directory");
  ft->add_option("--name", common.name, "run label in metrics.csv");

  auto* kn = app.add_subcommand("knn", "k-NN spot classification on frozen embeddings");
  add_config(kn);
  kn->add_option("--ckpt", common.ckpt, "encoder checkpoint")->required();
  kn->add_option("--data", common.data, "dataset file")->required();
  kn->add_option("--k", k, "neighbours (default from config)")->check(CLI::PositiveNumber);
  kn->add_option("--out", common.out, "output directory");
  kn->add_option("--name", common.name, "run label in metrics.csv");

  auto* ex = app.add_subcommand("export-embeddings", "write LID embeddings as CSV");
  add_config(ex);
  ex->add_option("--ckpt", common.ckpt, "encoder checkpoint")->required();
  ex->add_option("--data", common.data, "dataset file")->required();
  ex->add_option("--out", common.out, "CSV file")->required();

  auto* rep = app.add_subcommand("report", "merge metrics CSVs into one table");
  rep->add_option("--runs", runs, "metrics.csv files or run directories")->required();
  rep->add_option("--out", common.out, "merged CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", kUsage, e.what());
  }

  try {
    if (*gen) return cmd_gen_data(common);
    if (*pre) return cmd_pretrain(common);
    if (*lin) return cmd_linear_eval(common, task);
    if (*ft) {
      if (!random_init && common.ckpt.empty()) return report_error("usage", kUsage, "finetune needs --ckpt or --random-init");
      return cmd_finetune(common, random_init, task);
    }
    if (*kn) return cmd_knn(common, k);
    if (*ex) return cmd_export(common);
    if (*rep) return cmd_report(runs, common.out);
  } catch (const Error& e) {
    return report_error(error_code_name(e.code()), exit_code_for(e.code()), e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error("io", kMissingFile, e.what());
  } catch (const std::exception& e) {
    return report_error("internal", kOther, e.what());
  }
  return kOther;
}
