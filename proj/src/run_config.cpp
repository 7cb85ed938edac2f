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

#include "swit/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace swit {
namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kConfig, "config: " + what); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
    bad(key + ": expected a finite number, got '" + v + "'");
  return out;
}

template <typename I>
I to_integer(const std::string& key, const std::string& v) {
  I out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v, char sep) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(to_double(key, trim(item)));
  return out;
}

std::string vec3_text(const Vec3& p) { return fmt_double(p.x()) + "," + fmt_double(p.y()) + "," + fmt_double(p.z()); }

Vec3 to_vec3(const std::string& key, const std::string& v) {
  const auto xs = to_list(key, v, ',');
  if (xs.size() != 3) bad(key + ": expected x,y,z");
  return {xs[0], xs[1], xs[2]};
}

struct Binding {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename F>
Binding bind_double(std::string key, F field) {
  return {key, [field](const RunConfig& c) { return fmt_double(field(const_cast<RunConfig&>(c))); },
          [field, key](RunConfig& c, const std::string& v) { field(c) = to_double(key, v); }};
}

template <typename F>
Binding bind_int(std::string key, F field) {
  return {key, [field](const RunConfig& c) { return std::to_string(field(const_cast<RunConfig&>(c))); },
          [field, key](RunConfig& c, const std::string& v) {
            field(c) = to_integer<std::remove_reference_t<decltype(field(c))>>(key, v);
          }};
}

template <typename F>
Binding bind_bool(std::string key, F field) {
  return {key, [field](const RunConfig& c) { return std::string(field(const_cast<RunConfig&>(c)) ? "true" : "false"); },
          [field, key](RunConfig& c, const std::string& v) { field(c) = to_bool(key, v); }};
}

void add_recipe(std::vector<Binding>& b, const std::string& name, ViewRecipe AugmentPolicy::*recipe) {
  const std::string p = "augment." + name + ".";
  auto r = [recipe](RunConfig& c) -> ViewRecipe& { return c.train.augment.*recipe; };
  b.push_back(bind_double(p + "crop_fraction", [r](RunConfig& c) -> double& { return r(c).crop_fraction; }));
  b.push_back(bind_int(p + "target_length", [r](RunConfig& c) -> int& { return r(c).target_length; }));
  b.push_back(bind_double(p + "p_rss", [r](RunConfig& c) -> double& { return r(c).p_rss; }));
  b.push_back(bind_double(p + "p_rsf", [r](RunConfig& c) -> double& { return r(c).p_rsf; }));
  b.push_back(bind_double(p + "p_rgo", [r](RunConfig& c) -> double& { return r(c).p_rgo; }));
  b.push_back(bind_double(p + "p_rfc", [r](RunConfig& c) -> double& { return r(c).p_rfc; }));
  b.push_back(bind_double(p + "p_rsc", [r](RunConfig& c) -> double& { return r(c).p_rsc; }));
  b.push_back(bind_double(p + "p_normalize", [r](RunConfig& c) -> double& { return r(c).p_normalize; }));
  b.push_back(bind_double(p + "p_noise", [r](RunConfig& c) -> double& { return r(c).p_noise; }));
}

#define SW_D(key, expr) b.push_back(bind_double(key, [](RunConfig& c) -> double& { return c.expr; }))
#define SW_I(key, expr) b.push_back(bind_int(key, [](RunConfig& c) -> auto& { return c.expr; }))
#define SW_B(key, expr) b.push_back(bind_bool(key, [](RunConfig& c) -> bool& { return c.expr; }))

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = [] {
    std::vector<Binding> b;
    b.push_back({"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
                 [](RunConfig& c, const std::string& v) { c.seed = to_integer<std::uint64_t>("seed", v); }});
    b.push_back({"out_dir", [](const RunConfig& c) { return c.out_dir; },
                 [](RunConfig& c, const std::string& v) { c.out_dir = v; }});

    b.push_back({"scenario.region_lo", [](const RunConfig& c) { return vec3_text(c.scenario.region.lo); },
                 [](RunConfig& c, const std::string& v) { c.scenario.region.lo = to_vec3("scenario.region_lo", v); }});
    b.push_back({"scenario.region_hi", [](const RunConfig& c) { return vec3_text(c.scenario.region.hi); },
                 [](RunConfig& c, const std::string& v) { c.scenario.region.hi = to_vec3("scenario.region_hi", v); }});
    b.push_back({"scenario.rrh_positions",
                 [](const RunConfig& c) {
                   std::string out;
                   for (std::size_t i = 0; i < c.scenario.rrh_positions.size(); ++i)
                     out += (i ? ";" : "") + vec3_text(c.scenario.rrh_positions[i]);
                   return out;
                 },
                 [](RunConfig& c, const std::string& v) {
                   std::vector<Vec3> out;
                   std::stringstream ss(v);
                   std::string item;
                   while (std::getline(ss, item, ';')) out.push_back(to_vec3("scenario.rrh_positions", trim(item)));
                   if (out.empty()) bad("scenario.rrh_positions: at least one position required");
                   c.scenario.rrh_positions = std::move(out);
                 }});
    SW_I("scenario.num_users", scenario.num_users);
    SW_I("scenario.num_scatterers", scenario.num_scatterers);
    SW_I("scenario.array_rows", scenario.array_rows);
    SW_I("scenario.array_cols", scenario.array_cols);
    SW_D("scenario.carrier_freq", scenario.carrier_freq);
    SW_D("scenario.subcarrier_spacing", scenario.subcarrier_spacing);
    SW_I("scenario.num_subcarriers", scenario.num_subcarriers);
    SW_D("scenario.element_spacing", scenario.element_spacing);
    SW_D("scenario.scatterer_jitter_var", scenario.scatterer_jitter_var);
    SW_D("scenario.user_jitter_var", scenario.user_jitter_var);
    SW_I("scenario.snapshots", scenario.snapshots);
    SW_D("scenario.snr_db", scenario.snr_db);
    SW_B("scenario.noiseless", scenario.noiseless);
    SW_B("scenario.los_enabled", scenario.los_enabled);
    SW_I("scenario.spot_rows", scenario.spot_rows);
    SW_I("scenario.spot_cols", scenario.spot_cols);

    add_recipe(b, "global1", &AugmentPolicy::global1);
    add_recipe(b, "global2", &AugmentPolicy::global2);
    add_recipe(b, "local", &AugmentPolicy::local);
    SW_I("augment.num_local", train.augment.num_local);
    SW_D("augment.rgo_max", train.augment.rgo_max);
    SW_D("augment.rfc_sigma_min", train.augment.rfc_sigma_min);
    SW_D("augment.rfc_sigma_max", train.augment.rfc_sigma_max);
    SW_D("augment.noise_sigma", train.augment.noise_sigma);

    SW_I("encoder.embed_dim", train.model.encoder.embed_dim);
    SW_I("encoder.num_blocks", train.model.encoder.num_blocks);
    SW_I("encoder.num_heads", train.model.encoder.num_heads);
    SW_I("encoder.mlp_ratio", train.model.encoder.mlp_ratio);
    SW_I("encoder.max_positions", train.model.encoder.max_positions);
    SW_D("encoder.ln_gain", train.model.encoder.ln_gain);
    SW_D("encoder.ln_eps", train.model.encoder.ln_eps);
    SW_B("encoder.final_norm", train.model.encoder.final_norm);

    SW_I("projector.hidden", train.model.projector.hidden);
    SW_I("projector.bottleneck", train.model.projector.bottleneck);
    SW_I("projector.global_prototypes", train.model.projector.global_prototypes);
    SW_I("projector.local_prototypes", train.model.projector.local_prototypes);
    SW_D("projector.expander_std", train.model.projector.expander_std);

    SW_D("ssl.chi_online", train.ssl.chi_online);
    SW_D("ssl.chi_target", train.ssl.chi_target);
    SW_D("ssl.beta", train.ssl.beta);
    SW_I("ssl.neighbor_window", train.ssl.neighbor_window);
    SW_I("ssl.neighbor_topk", train.ssl.neighbor_topk);

    SW_I("train.batch_size", train.batch_size);
    SW_I("train.epochs", train.epochs);
    SW_I("train.warmup_epochs", train.warmup_epochs);
    SW_D("train.base_lr", train.base_lr);
    SW_D("train.min_lr", train.min_lr);
    SW_D("train.wd_start", train.wd_start);
    SW_D("train.wd_end", train.wd_end);
    SW_D("train.clip_norm", train.clip_norm);
    SW_D("train.center_momentum", train.center_momentum);
    SW_D("train.kappa_base", train.kappa_base);
    SW_B("train.freeze_first_epoch", train.freeze_first_epoch);
    SW_I("train.chunk_size", train.chunk_size);
    SW_I("train.checkpoint_every", train.checkpoint_every);

    b.push_back({"eval.mode", [](const RunConfig& c) { return std::string(eval_mode_name(c.eval.mode)); },
                 [](RunConfig& c, const std::string& v) { c.eval.mode = parse_eval_mode(v); }});
    b.push_back({"eval.task", [](const RunConfig& c) { return std::string(eval_task_name(c.eval.task)); },
                 [](RunConfig& c, const std::string& v) { c.eval.task = parse_eval_task(v); }});
    SW_I("eval.train_size", eval.train_size);
    SW_I("eval.test_size", eval.test_size);
    SW_D("eval.train_fraction", eval.train_fraction);
    SW_I("eval.linear_epochs", eval.linear_epochs);
    SW_I("eval.linear_batch", eval.linear_batch);
    SW_I("eval.finetune_epochs", eval.finetune_epochs);
    SW_I("eval.finetune_batch", eval.finetune_batch);
    SW_I("eval.head_hidden", eval.head_hidden);
    SW_D("eval.lr", eval.lr);
    SW_D("eval.weight_decay", eval.weight_decay);
    SW_I("eval.k", eval.k);
    SW_I("eval.chunk_size", eval.chunk_size);
    return b;
  }();
  return table;
}

#undef SW_D
#undef SW_I
#undef SW_B

}  // namespace

void RunConfig::apply_seed() {
  scenario.seed = seed;
  train.seed = seed;
  eval.seed = seed;
}

void RunConfig::validate() const {
  try {
    scenario.validate();
    train.validate();
    eval.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    bad(e.what());
  }
}

RunConfig parse_run_config(std::istream& in) {
  std::map<std::string, const Binding*> index;
  for (const auto& b : bindings()) index.emplace(b.key, &b);

  RunConfig config;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = index.find(key);
    if (it == index.end()) bad("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (const auto [pos, fresh] = seen.emplace(key, lineno); !fresh)
      bad("line " + std::to_string(lineno) + ": '" + key + "' already set on line " + std::to_string(pos->second));
    try {
      it->second->set(config, value);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw;
      bad(key + ": " + e.what());
    }
  }
  config.apply_seed();
  return config;
}

RunConfig parse_run_config(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(in);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "config: cannot open " + path.string());
  return parse_run_config(in);
}

void set_run_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& b : bindings()) {
    if (b.key != key) continue;
    try {
      b.set(config, trim(value));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw;
      bad(key + ": " + e.what());
    }
    config.apply_seed();
    return;
  }
  bad("unknown key '" + key + "'");
}

std::string serialize_run_config(const RunConfig& config) {
  std::string out;
  for (const auto& b : bindings()) out += b.key + " = " + b.get(config) + "\n";
  return out;
}

std::vector<std::string> run_config_keys() {
  std::vector<std::string> keys;
  for (const auto& b : bindings()) keys.push_back(b.key);
  return keys;
}

}  // namespace swit
