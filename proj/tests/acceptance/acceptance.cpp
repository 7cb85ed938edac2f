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

// Acceptance runner: one PASS/FAIL line per criterion, with indented sub-check details.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "swit/augment.hpp"
#include "swit/channel_sim.hpp"
#include "swit/dataset_io.hpp"
#include "swit/error.hpp"
#include "swit/eval_harness.hpp"
#include "swit/nn/checkpoint.hpp"
#include "swit/nn/grad_check.hpp"
#include "swit/nn/ops.hpp"
#include "swit/nn/optim.hpp"
#include "swit/parallel.hpp"
#include "swit/run_config.hpp"
#include "swit/swit_trainer.hpp"
#include "swit/wit_encoder.hpp"

namespace fs = std::filesystem;
using namespace swit;
using namespace swit::nn;

namespace {

using M = Matrix<double>;
using cd = std::complex<double>;
using Clock = std::chrono::steady_clock;

constexpr double kPi = std::numbers::pi;
constexpr int kSeeds[] = {1, 2, 3};

struct Check {
  std::string id;
  bool ok;
  std::string detail;
};

struct Criterion {
  int number;
  std::string title;
  std::function<void(std::vector<Check>&)> run;
};

struct Options {
  fs::path cache;
  std::string swit_exe;
  double cores = 0.0;
};

Options g_opt;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

M random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double sd = 1.0) {
  M m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, sd);
  return m;
}

Var<double> probe(const Var<double>& y) {
  Rng rng(5);
  return weighted_sum(y, random_matrix(rng, y.rows(), y.cols()));
}

void jitter(ParamStore<double>& s, Rng& rng, double sd) {
  for (auto& p : s.entries())
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] += rng.normal(0.0, sd);
}

std::string bytes_of(const Checkpoint& ck) {
  std::ostringstream out(std::ios::binary);
  write_checkpoint(out, ck);
  return out.str();
}

// ---------------------------------------------------------------- criterion 1

void gradient_checks(std::vector<Check>& out) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_name;
  auto record = [&](const std::string& name, ParamStore<double>& s, const ScalarFn& f) {
    const auto r = grad_check(s, f, 1e-4, 1e-5);
    if (r.max_rel_error >= worst) {
      worst = r.max_rel_error;
      worst_name = name + ":" + r.worst_parameter;
    }
    out.push_back({name, r.max_rel_error <= 1e-4, "max rel error " + fmt("%.3g", r.max_rel_error)});
  };

  struct Prim {
    const char* name;
    std::vector<std::pair<const char*, std::pair<int, int>>> inputs;
    ScalarFn f;
  };
  const std::vector<Prim> prims = {
      {"matmul", {{"a", {3, 4}}, {"b", {4, 5}}}, [](Graph<double>&, const Bound<double>& p) { return probe(matmul(p["a"], p["b"])); }},
      {"linear", {{"x", {3, 4}}, {"w", {4, 2}}, {"b", {1, 2}}},
       [](Graph<double>&, const Bound<double>& p) { return probe(linear(p["x"], p["w"], p["b"])); }},
      {"gelu", {{"a", {4, 4}}}, [](Graph<double>&, const Bound<double>& p) { return probe(gelu(p["a"])); }},
      {"layer_norm", {{"a", {4, 6}}}, [](Graph<double>&, const Bound<double>& p) { return probe(layer_norm_rows(p["a"], 1.3, 1e-4)); }},
      {"softmax", {{"a", {3, 5}}}, [](Graph<double>&, const Bound<double>& p) { return probe(softmax_rows(p["a"])); }},
      {"log_softmax", {{"a", {3, 5}}}, [](Graph<double>&, const Bound<double>& p) { return probe(log_softmax_rows(p["a"])); }},
      {"attention", {{"q", {6, 4}}, {"k", {10, 4}}, {"v", {10, 4}}},
       [](Graph<double>&, const Bound<double>& p) { return probe(attention(p["q"], p["k"], p["v"], 2, 3, 5, 2)); }},
  };
  for (const auto& pr : prims) {
    Rng rng(7);
    ParamStore<double> s;
    for (const auto& [n, shape] : pr.inputs) s.add(n, random_matrix(rng, shape.first, shape.second));
    record(std::string("op.") + pr.name, s, pr.f);
  }

  for (int heads : {1, 2}) {
    Rng rng(3);
    ParamStore<double> s;
    init_block(s, "blk.", 8, 16, rng);
    s.add("x", random_matrix(rng, 2 * 5, 8));
    jitter(s, rng, 0.3);
    record("block.heads" + std::to_string(heads), s, [heads](Graph<double>&, const Bound<double>& p) {
      return probe(transformer_block(p, "blk.", p["x"], 2, 5, heads, 1.0, 1e-4));
    });
  }
  {
    EncoderConfig cfg;
    cfg.token_width = 6;
    cfg.embed_dim = 8;
    cfg.num_blocks = 2;
    cfg.num_heads = 2;
    cfg.mlp_ratio = 2;
    cfg.max_positions = 9;
    Rng rng(4);
    ParamStore<double> s;
    init_encoder(s, cfg, rng);
    jitter(s, rng, 0.1);
    const M tokens = random_matrix(rng, 2 * 8, 6);
    record("encoder", s, [&](Graph<double>& g, const Bound<double>& p) { return probe(encode(g, p, cfg, tokens, 2)); });
    for (int hidden : {0, 5}) {
      ParamStore<double> h;
      const HeadConfig hc{8, 2, hidden};
      init_head(h, hc, rng);
      h.add("x", random_matrix(rng, 4, 8));
      jitter(h, rng, 0.3);
      record("head.hidden" + std::to_string(hidden), h,
             [&](Graph<double>&, const Bound<double>& p) { return probe(mlp_head(p, hc, p["x"])); });
    }
  }

  ModelConfig m;
  m.encoder.token_width = 6;
  m.encoder.embed_dim = 8;
  m.encoder.num_heads = 2;
  m.encoder.mlp_ratio = 2;
  m.encoder.max_positions = 9;
  m.projector.hidden = 10;
  m.projector.bottleneck = 6;
  m.projector.global_prototypes = 12;
  m.projector.local_prototypes = 7;
  m.projector.expander_std = 0.3;
  for (const char* prefix : {"proj_global.", "proj_local."}) {
    Rng rng(3);
    ParamStore<double> s;
    init_model(s, m, rng);
    jitter(s, rng, 0.2);
    s.add("x", random_matrix(rng, 4, 8));
    record(std::string("projector.") + (prefix[5] == 'g' ? "global" : "local"), s,
           [&](Graph<double>&, const Bound<double>& p) { return probe(projector(p, prefix, p["x"])); });
  }
  {
    Rng rng(1);
    ParamStore<double> s;
    init_attention_pool(s, "nu.", 8, 16, rng);
    s.add("src", random_matrix(rng, 7, 8));
    jitter(s, rng, 0.3);
    const std::vector<int> members{0, 3, 5, 1, 2, 6, 4, 4, 0};
    record("nu_pool", s, [&](Graph<double>&, const Bound<double>& p) {
      return probe(attention_pool(p, "nu.", p["src"], std::span<const int>(members), 3, 2, 1.0, 1e-4));
    });
  }
  {
    const SslConfig ssl;
    Rng rng(5);
    ParamStore<double> online;
    init_model(online, m, rng);
    jitter(online, rng, 0.1);
    ParamStore<double> target = online;
    jitter(target, rng, 0.05);
    ViewBatch<double> vb;
    vb.batch = 2;
    vb.num_global = 2;
    vb.num_local = 2;
    vb.global_tokens = random_matrix(rng, 2 * 2 * 8, 6);
    vb.local_tokens = random_matrix(rng, 2 * 2 * 7, 6);
    const M cg = random_matrix(rng, 1, 12, 0.1);
    const M cl = random_matrix(rng, 1, 7, 0.1);
    record("L_SSL", online, [&](Graph<double>& g, const Bound<double>& p) {
      return ssl_forward(g, p, target, m, ssl, vb, cg, cl).total;
    });
  }
  const double secs = seconds_since(t0);
  out.push_back({"runtime", secs < 60.0, fmt("%.2f s", secs) + " (limit 60 s); worst " + worst_name});
}

// ---------------------------------------------------------------- criterion 2

ArrayGeometry geometry(int rows, int cols, double spacing_frac) {
  ArrayGeometry g;
  g.rows = rows;
  g.cols = cols;
  g.wavelength = kSpeedOfLight / 3.5e9;
  g.spacing = spacing_frac * g.wavelength;
  g.subcarrier_spacing = 625e3;
  return g;
}

cd brute_force_entry(int n, int element, const std::vector<PathParams>& paths, const ArrayGeometry& g) {
  const int mz = element / g.cols;
  const int mx = element % g.cols;
  const double k = 2.0 * kPi / g.wavelength;
  cd acc(0.0, 0.0);
  for (const auto& p : paths) {
    const double spatial =
        k * g.spacing * (mz * std::cos(p.elevation) + mx * std::sin(p.elevation) * std::sin(p.azimuth));
    const double spectral = 2.0 * kPi * n * g.subcarrier_spacing * p.delay;
    acc += p.gain * std::polar(1.0, spectral) * std::polar(1.0, spatial);
  }
  return acc;
}

void channel_oracle(std::vector<Check>& out) {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = 1 + static_cast<int>(rng.integer(0, 3));
    const int cols = 1 + static_cast<int>(rng.integer(0, 3));
    const auto g = geometry(rows, cols, rng.uniform(0.3, 0.7));
    std::vector<PathParams> paths(static_cast<std::size_t>(rng.integer(1, 5)));
    for (auto& p : paths) {
      p.gain = std::polar(rng.uniform(1e-4, 1e-2), rng.uniform(-kPi, kPi));
      p.delay = rng.uniform(0.0, 2e-6);
      p.azimuth = rng.uniform(-kPi, kPi);
      p.elevation = rng.uniform(0.0, kPi);
    }
    const int n = static_cast<int>(rng.integer(0, 31));
    const auto h = channel_vector(n, paths, g);
    for (int e = 0; e < rows * cols; ++e) worst = std::max(worst, std::abs(h[e] - brute_force_entry(n, e, paths, g)));
  }
  out.push_back({"brute_force", worst <= 1e-12, "max |diff| " + fmt("%.3g", worst) + " over 100 instances"});

  double norm_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = 1 + static_cast<int>(rng.integer(0, 7));
    const int cols = 1 + static_cast<int>(rng.integer(0, 7));
    const auto g = geometry(rows, cols, 0.5);
    const auto a = array_response(rng.uniform(-kPi, kPi), rng.uniform(0.0, kPi), g);
    norm_err = std::max(norm_err, std::abs(a.norm() - std::sqrt(static_cast<double>(rows * cols))));
  }
  out.push_back({"array_norm", norm_err <= 1e-9, "max |norm - sqrt(N_r)| " + fmt("%.3g", norm_err)});
}

// ---------------------------------------------------------------- criterion 3

TokenSequence random_seq(Rng& rng, int length, int antennas) {
  TokenSequence s;
  s.tokens.resize(length, 3 * antennas);
  for (Eigen::Index i = 0; i < s.tokens.size(); ++i) s.tokens.data()[i] = rng.normal();
  return s;
}

bool same(const TokenSequence& a, const TokenSequence& b) {
  return a.tokens.rows() == b.tokens.rows() && a.tokens.cols() == b.tokens.cols() && a.tokens == b.tokens;
}

void augmentation_algebra(std::vector<Check>& out) {
  Rng rng(3);
  bool inv_f = true, inv_c = true, id_rss = true;
  double homog = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto s = random_seq(rng, 32, 16);
    inv_f = inv_f && same(rsf(rsf(s)), s);
    inv_c = inv_c && same(rsc(rsc(s)), s);
    Rng r(static_cast<std::uint64_t>(t));
    id_rss = id_rss && same(rss(s, 1.0, 32, r), s);
    const Normalization n{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
    const double a = rng.uniform(0.1, 10.0);
    const RowMatrix lhs = normalize(scale_all(s, a), n).tokens;
    const RowMatrix rhs = a * normalize(s, n).tokens;
    homog = std::max(homog, (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, rhs.cwiseAbs().maxCoeff()));
  }
  out.push_back({"rsf_involution", inv_f, "50 random sequences"});
  out.push_back({"rsc_involution", inv_c, "50 random sequences"});
  out.push_back({"rss_identity", id_rss, "gamma = 1, same length"});
  out.push_back({"normalize_homogeneity", homog <= 1e-12, "max rel diff " + fmt("%.3g", homog)});

  TokenSequence s;
  s.tokens.resize(1, 6);
  s.tokens << 0.1, -0.2, 0.3, 0.4, 0.25, 0.0;
  const double v = rfc_with_sigma(s, 0.5).tokens(0, 4);
  out.push_back({"rfc_scalar", std::abs(v - 0.8825) <= 1e-4, "h = 0.25, sigma = 0.5 -> " + fmt("%.6f", v)});

  bool det = true;
  const auto base = random_seq(rng, 32, 16);
  const AugmentPolicy policy;
  for (std::uint64_t seed : {1u, 42u, 777u}) {
    Rng a(seed), b(seed);
    const auto va = make_views(base, policy, Normalization{}, a);
    const auto vb = make_views(base, policy, Normalization{}, b);
    for (std::size_t i = 0; i < va.size(); ++i) det = det && same(va[i], vb[i]);
    Rng c(seed), d(seed);
    det = det && same(rss(base, 0.5, 36, c), rss(base, 0.5, 36, d)) && same(rgo(base, c), rgo(base, d)) &&
          same(rfc(base, c), rfc(base, d)) && same(gaussian_noise(base, 0.01, c), gaussian_noise(base, 0.01, d));
  }
  out.push_back({"bit_determinism", det, "views and stochastic ops repeat bit-for-bit per seed"});
}

// ---------------------------------------------------------------- criterion 4

void attention_symmetry(std::vector<Check>& out) {
  const int C = 6;
  double worst_lid = 0.0, worst_tok = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(100 + static_cast<std::uint64_t>(trial));
    EncoderConfig cfg;
    cfg.token_width = 6;
    cfg.embed_dim = 8;
    cfg.num_heads = trial % 2 + 1;
    cfg.num_blocks = 1 + trial % 2;
    cfg.mlp_ratio = 2;
    cfg.max_positions = 9;
    ParamStore<double> s;
    init_encoder(s, cfg, rng);
    jitter(s, rng, 0.2);
    s.at("encoder.pos").value.setZero();
    const M tokens = random_matrix(rng, C, cfg.token_width);
    std::vector<int> perm(C);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    M permuted(C, cfg.token_width);
    for (int i = 0; i < C; ++i) permuted.row(i) = tokens.row(perm[i]);
    Graph<double> g1, g2;
    const M a = encode(g1, Bound<double>(g1, s, false), cfg, tokens, 1).value();
    const M b = encode(g2, Bound<double>(g2, s, false), cfg, permuted, 1).value();
    worst_lid = std::max(worst_lid, (a.row(0) - b.row(0)).cwiseAbs().maxCoeff());
    for (int i = 0; i < C; ++i) worst_tok = std::max(worst_tok, (b.row(1 + i) - a.row(1 + perm[i])).cwiseAbs().maxCoeff());
  }
  out.push_back({"token_equivariance", worst_tok <= 1e-6, "max |diff| " + fmt("%.3g", worst_tok) + " over 20 instances"});
  out.push_back({"lid_invariance", worst_lid <= 1e-6, "max |diff| " + fmt("%.3g", worst_lid)});
}

// ---------------------------------------------------------------- desk runs

RunConfig desk_config(int seed) {
  RunConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.apply_seed();
  cfg.train.model.encoder.token_width = 3 * cfg.scenario.num_antennas();
  cfg.validate();
  return cfg;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double parse_runtime(const fs::path& p) {
  const std::string text = read_file(p);
  const auto at = text.find(" after ");
  if (at == std::string::npos) return -1.0;
  return std::atof(text.c_str() + at + 7);
}

struct DeskRun {
  RunConfig cfg;
  Dataset data;
  EncoderSnapshot encoder;
  EncoderSnapshot random;
  double pretrain_seconds = 0.0;
  bool reused = false;
};

// Generates the seed's dataset and returns the pretrained encoder, reusing a cached run when its config matches.
DeskRun desk_run(int seed) {
  DeskRun run;
  run.cfg = desk_config(seed);
  run.data = generate_dataset(run.cfg.scenario);
  const fs::path dir = g_opt.cache / ("seed" + std::to_string(seed));
  const std::string config_text = serialize_run_config(run.cfg);
  const bool cached = fs::exists(dir / "encoder.ckpt") && fs::exists(dir / "runtime.log") &&
                      read_file(dir / "config.txt") == config_text && parse_runtime(dir / "runtime.log") > 0.0;
  if (cached) {
    run.reused = true;
    run.pretrain_seconds = parse_runtime(dir / "runtime.log");
  } else {
    std::cerr << "pretraining seed " << seed << " into " << dir.string() << "\n";
    fs::create_directories(dir);
    std::ofstream(dir / "config.txt", std::ios::binary) << config_text;
    PretrainOptions options;
    options.out_dir = dir;
    options.on_step = [](const StepStats& s) {
      if (s.step % 256 == 0) std::cerr << "  step " << s.step << " loss " << s.loss << "\n";
    };
    const PretrainResult res = pretrain(run.data, run.cfg.train, options);
    run.pretrain_seconds = res.seconds;
    std::ofstream(dir / "runtime.log") << "pretrain finished after " << res.seconds << " s\n";
  }
  run.encoder = load_encoder_snapshot(load_checkpoint(dir / "encoder.ckpt"));
  run.random = random_encoder(run.cfg.train.model.encoder, run.cfg.seed);
  return run;
}

// Built on first use, so a criterion touches only the seeds it needs.
DeskRun& desk_run_for(int seed) {
  static std::map<int, DeskRun> runs;
  auto it = runs.find(seed);
  if (it == runs.end()) it = runs.emplace(seed, desk_run(seed)).first;
  return it->second;
}

double knn_top1(const EncoderSnapshot& enc, const Dataset& data, const EvalConfig& eval) {
  const Split split = split_for(data, eval);
  const Eigen::MatrixXd emb = extract_embeddings(enc, data, eval.chunk_size);
  const auto labels = spot_labels(data);
  std::vector<std::uint32_t> train_y, test_y;
  for (auto i : split.train) train_y.push_back(labels[i]);
  for (auto i : split.test) test_y.push_back(labels[i]);
  return knn_eval(select_rows(emb, split.train), train_y, select_rows(emb, split.test), test_y, eval.k, data.spot_count)
      .top1;
}

// ---------------------------------------------------------------- criterion 5

void no_collapse(std::vector<Check>& out) {
  double pre = 0.0, rnd = 0.0, worst_secs = 0.0;
  std::string per_seed;
  for (int seed : kSeeds) {
    DeskRun& run = desk_run_for(seed);
    EvalConfig eval = run.cfg.eval;
    eval.mode = EvalMode::kKnn;
    eval.task = EvalTask::kSpot;
    const double a = knn_top1(run.encoder, run.data, eval);
    const double b = knn_top1(run.random, run.data, eval);
    pre += a;
    rnd += b;
    worst_secs = std::max(worst_secs, run.pretrain_seconds);
    per_seed += " seed" + std::to_string(run.cfg.seed) + " " + fmt("%.2f", a) + "/" + fmt("%.2f", b);
  }
  pre /= std::size(kSeeds);
  rnd /= std::size(kSeeds);
  out.push_back({"ratio", pre >= 2.0 * rnd,
                 "pretrained " + fmt("%.2f%%", pre) + " vs 2 x random " + fmt("%.2f%%", 2.0 * rnd) +
                     " (pretrained/random per seed:" + per_seed + ")"});
  out.push_back({"absolute", pre >= 60.0, "mean top-1 " + fmt("%.2f%%", pre) + " (limit 60%)"});
  const double cores = g_opt.cores > 0.0 ? g_opt.cores : static_cast<double>(worker_count());
  const double equiv = worst_secs * cores / 4.0;
  out.push_back({"runtime", equiv <= 1800.0,
                 "slowest pretrain " + fmt("%.0f s", worst_secs) + " on " + fmt("%.0f", cores) + " core(s) = " +
                     fmt("%.0f s", equiv) + " on 4 cores (limit 1800 s)"});
}

// ---------------------------------------------------------------- criterion 6

void write_row(const fs::path& dir, const std::string& name, const EvalConfig& eval, const MetricsReport& r) {
  fs::create_directories(dir);
  const ReportRow row{name, eval_mode_name(eval.mode), eval_task_name(eval.task), r};
  std::ofstream out(dir / "metrics.csv", std::ios::binary);
  write_metrics_csv(out, std::span<const ReportRow>(&row, 1));
}

void small_data(std::vector<Check>& out) {
  int wins = 0;
  std::string detail;
  std::vector<std::string> dirs;
  for (int seed : kSeeds) {
    DeskRun& run = desk_run_for(seed);
    EvalConfig eval = run.cfg.eval;
    eval.mode = EvalMode::kFinetune;
    eval.task = EvalTask::kLocation;
    eval.train_size = 256;
    eval.test_size = 0;
    const Split split = split_for(run.data, eval);
    const auto pre = fine_tune(run.encoder, run.data, split, eval.task, eval);
    const auto rnd = fine_tune(run.random, run.data, split, eval.task, eval);
    if (pre.report.mae < rnd.report.mae) ++wins;
    const std::string tag = "seed" + std::to_string(run.cfg.seed);
    detail += " " + tag + " " + fmt("%.3f", pre.report.mae) + "/" + fmt("%.3f", rnd.report.mae);
    const fs::path base = g_opt.cache / "small_data" / tag;
    write_row(base / "pretrained", "pretrained-" + tag, eval, pre.report);
    write_row(base / "random", "random-init-" + tag, eval, rnd.report);
    dirs.push_back((base / "pretrained").string());
    dirs.push_back((base / "random").string());
  }
  out.push_back({"wins", wins >= 2, std::to_string(wins) + " of 3 seeds (MAE m pretrained/random:" + detail + ")"});

  if (g_opt.swit_exe.empty()) {
    out.push_back({"report", false, "no swit executable given (--swit)"});
    return;
  }
  const fs::path report = g_opt.cache / "small_data" / "report.csv";
  std::string cmd = "\"" + g_opt.swit_exe + "\" report --out \"" + report.string() + "\" --runs";
  for (const auto& d : dirs) cmd += " \"" + d + "\"";
  cmd += " > /dev/null";
  const int rc = std::system(cmd.c_str());
  std::ifstream in(report, std::ios::binary);
  std::size_t pretrained = 0, random = 0;
  if (rc == 0 && in)
    for (const auto& row : read_metrics_csv(in)) {
      if (row.run.rfind("pretrained-", 0) == 0) ++pretrained;
      if (row.run.rfind("random-init-", 0) == 0) ++random;
    }
  out.push_back({"report", rc == 0 && pretrained == 3 && random == 3,
                 "report rows pretrained " + std::to_string(pretrained) + ", random-init " + std::to_string(random) +
                     " in " + report.string()});
}

// ---------------------------------------------------------------- criterion 7

void optimizer_invariants(std::vector<Check>& out) {
  Rng rng(9);
  ParamStore<float> online, target;
  online.add_normal("a", 5, 7, 1.0, rng);
  online.add_normal("b", 1, 3, 1.0, rng, false);
  target = online;
  for (auto& p : target.entries()) p.value *= 0.5f;
  bool exact = true;
  for (int step = 0; step < 50; ++step) {
    for (auto& p : online.entries()) p.value.array() += 0.01f * static_cast<float>(step);
    const double kappa = 0.996 + 0.00008 * step;
    const float k = static_cast<float>(kappa);
    std::vector<Matrix<float>> expect;
    for (std::size_t i = 0; i < target.size(); ++i) {
      Matrix<float> e = target.entries()[i].value;
      for (Eigen::Index j = 0; j < e.size(); ++j)
        e.data()[j] = k * e.data()[j] + (1.0f - k) * online.entries()[i].value.data()[j];
      expect.push_back(e);
    }
    ema_update(target, online, kappa);
    for (std::size_t i = 0; i < target.size(); ++i) exact = exact && target.entries()[i].value == expect[i];
  }
  out.push_back({"ema_exact", exact, "50 steps against the scalar recurrence"});

  const RunConfig cfg = desk_config(1);
  ScenarioConfig tiny = cfg.scenario;
  tiny.num_users = cfg.train.batch_size * 4;
  const Dataset data = generate_dataset(tiny);
  const Trainer t(cfg.train, data);
  const double k0 = t.kappa_at(0), kU = t.kappa_at(t.total_steps());
  out.push_back({"kappa_start", std::abs(k0 - cfg.train.kappa_base) <= 1e-12 && cfg.train.kappa_base == 0.996,
                 "kappa(0) = " + fmt("%.15g", k0)});
  out.push_back({"kappa_end", std::abs(kU - 1.0) <= 1e-12, "kappa(U) = " + fmt("%.15g", kU)});
  const std::int64_t warm = static_cast<std::int64_t>(cfg.train.warmup_epochs) * t.steps_per_epoch();
  const double lr = t.lr_at(warm), want = cfg.train.base_lr * cfg.train.batch_size / 256.0;
  out.push_back({"lr_warmup_end", std::abs(lr - want) <= 1e-15 * want + 1e-18,
                 "lr(" + std::to_string(warm) + ") = " + fmt("%.6g", lr) + ", expected " + fmt("%.6g", want)});

  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    ParamStore<float> s;
    s.add("a", Matrix<float>::Zero(7, 5));
    s.add("b", Matrix<float>::Zero(1, 13));
    const double sc = std::pow(10.0, rng.uniform(-2, 4));
    for (auto& p : s.entries())
      for (Eigen::Index i = 0; i < p.grad.size(); ++i) p.grad.data()[i] = static_cast<float>(rng.normal() * sc);
    clip_gradients(s, 3.0);
    worst = std::max(worst, global_grad_norm(s));
  }
  out.push_back({"clip", worst <= 3.0 + 1e-9, "max clipped norm " + fmt("%.12g", worst) + " over 200 trials"});
}

// ---------------------------------------------------------------- criteria 8 and 9

struct ShortRun {
  std::vector<StepStats> trace;
  std::string final_bytes;
  std::string encoder_bytes;
};

const std::vector<ShortRun>& short_runs() {
  static const std::vector<ShortRun> runs = [] {
    const RunConfig cfg = desk_config(1);
    const Dataset data = generate_dataset(cfg.scenario);
    std::vector<ShortRun> r;
    for (int i = 0; i < 2; ++i) {
      PretrainOptions options;
      options.max_steps = 10;
      const PretrainResult res = pretrain(data, cfg.train, options);
      r.push_back({res.trace, bytes_of(res.final_state), bytes_of(res.encoder)});
    }
    return r;
  }();
  return runs;
}

void step_zero_loss(std::vector<Check>& out) {
  const RunConfig cfg = desk_config(1);
  const double oracle = std::log(static_cast<double>(cfg.train.model.projector.global_prototypes)) +
                        cfg.train.ssl.beta * std::log(static_cast<double>(cfg.train.model.projector.local_prototypes));
  const double loss = short_runs().front().trace.front().loss;
  const double rel = std::abs(loss - oracle) / oracle;
  out.push_back({"near_uniform", rel <= 0.1,
                 "L_SSL(0) = " + fmt("%.6f", loss) + ", oracle " + fmt("%.6f", oracle) + ", rel " + fmt("%.4f", rel)});
}

void determinism(std::vector<Check>& out) {
  const auto& r = short_runs();
  double worst = 0.0;
  bool lengths = r[0].trace.size() == 10 && r[1].trace.size() == 10;
  for (std::size_t i = 0; lengths && i < 10; ++i)
    worst = std::max({worst, std::abs(r[0].trace[i].loss - r[1].trace[i].loss),
                      std::abs(r[0].trace[i].macro - r[1].trace[i].macro), std::abs(r[0].trace[i].micro - r[1].trace[i].micro)});
  out.push_back({"loss_trace", lengths && worst <= 1e-12, "max |diff| over 10 steps " + fmt("%.3g", worst)});
  out.push_back({"checkpoint_bytes", r[0].final_bytes == r[1].final_bytes && r[0].encoder_bytes == r[1].encoder_bytes,
                 std::to_string(r[0].final_bytes.size()) + " bytes of trainer state compared"});
}

// ---------------------------------------------------------------- criterion 10

void pathloss(std::vector<Check>& out) {
  DeskRun& run = desk_run_for(kSeeds[0]);
  EvalConfig eval = run.cfg.eval;
  eval.task = EvalTask::kPathloss;
  eval.mode = EvalMode::kLinear;
  const double pre = pathloss_transfer(run.encoder, run.data, eval).report.mae;
  const double rnd = pathloss_transfer(run.random, run.data, eval).report.mae;
  EvalConfig sup = eval;
  sup.mode = EvalMode::kFinetune;
  sup.train_size = 0;
  sup.test_size = 0;
  sup.train_fraction = 0.8;
  const Split split = split_for(run.data, sup);
  const double full = fine_tune(run.random, run.data, split, EvalTask::kPathloss, sup).report.mae;
  out.push_back({"vs_supervised", pre <= 1.5 * full,
                 "frozen linear " + fmt("%.3f dB", pre) + ", supervised " + fmt("%.3f dB", full) + ", bound " +
                     fmt("%.3f dB", 1.5 * full)});
  out.push_back({"vs_random", rnd > pre, "frozen random-init linear " + fmt("%.3f dB", rnd)});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks; prints one PASS/FAIL line per criterion."};
  std::vector<int> only;
  std::vector<std::string> expected;
  std::string cache = "acceptance_cache";
  if (const char* env = std::getenv("SWIT_ACCEPT_CACHE")) cache = env;
  app.add_option("--cache", cache, "directory holding pretrained desk runs and evaluation outputs");
  app.add_option("--swit", g_opt.swit_exe, "path of the swit executable used for the report check");
  app.add_option("--only", only, "criteria to run (default: all)");
  app.add_option("--expect-fail", expected, "sub-checks known to be unattainable, as N:id; they do not fail the exit code");
  app.add_option("--cores", g_opt.cores, "cores used by pretraining (default: worker count)");
  CLI11_PARSE(app, argc, argv);
  g_opt.cache = cache;

  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", gradient_checks},
      {2, "channel-model oracle", channel_oracle},
      {3, "augmentation algebra", augmentation_algebra},
      {4, "attention symmetry", attention_symmetry},
      {5, "no collapse and k-NN trend", no_collapse},
      {6, "small-data fine-tuning trend", small_data},
      {7, "optimizer and schedule invariants", optimizer_invariants},
      {8, "step-0 loss", step_zero_loss},
      {9, "determinism", determinism},
      {10, "path-loss transfer", pathloss},
  };
  const std::set<std::string> allowed(expected.begin(), expected.end());
  int passed = 0, ran = 0;
  std::vector<std::string> unexpected, tolerated;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.number) == only.end()) continue;
    ++ran;
    std::vector<Check> checks;
    const auto t0 = Clock::now();
    try {
      c.run(checks);
    } catch (const std::exception& e) {
      checks.push_back({"exception", false, e.what()});
    }
    const bool ok = std::all_of(checks.begin(), checks.end(), [](const Check& k) { return k.ok; });
    passed += ok;
    std::printf("criterion %d: %s  %s (%.1f s)\n", c.number, ok ? "PASS" : "FAIL", c.title.c_str(), seconds_since(t0));
    for (const auto& k : checks) {
      std::printf("    %-7s %s: %s\n", k.ok ? "ok" : "not ok", k.id.c_str(), k.detail.c_str());
      if (k.ok) continue;
      const std::string key = std::to_string(c.number) + ":" + k.id;
      (allowed.count(key) ? tolerated : unexpected).push_back(key);
    }
    std::fflush(stdout);
  }
  std::printf("summary: %d of %d criteria pass", passed, ran);
  if (!tolerated.empty()) {
    std::printf("; known unattainable:");
    for (const auto& k : tolerated) std::printf(" %s", k.c_str());
  }
  if (!unexpected.empty()) {
    std::printf("; unexpected failures:");
    for (const auto& k : unexpected) std::printf(" %s", k.c_str());
  }
  std::printf("\n");
  return unexpected.empty() ? 0 : 1;
}
