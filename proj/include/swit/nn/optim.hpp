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

#include "swit/nn/params.hpp"

namespace swit::nn {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One AdamW update with decoupled weight decay: p -= lr*wd*p, then the
/// bias-corrected Adam step. `step` is 1-based. Parameters flagged
/// decay=false skip the decay term.
template <typename T>
void adamw_step(ParamStore<T>& params, double lr, double weight_decay, std::int64_t step, const AdamWConfig& config = {});

/// Linear warmup 0 -> start over `warmup_steps`, then cosine start -> end.
double cosine_schedule(double step, double total, double start, double end, double warmup_steps);

/// Target EMA rate at (fractional) epoch u of U: 1 - (1 - base)(cos(pi u / U) + 1) / 2.
double ema_momentum(double epoch, double total_epochs, double base);

/// Cosine ramp from `start` at u = 0 to `end` at u = U (same shape as ema_momentum).
double cosine_ramp(double epoch, double total_epochs, double start, double end);

template <typename T>
double global_grad_norm(const ParamStore<T>& params);

/// Rescales all grads so the global L2 norm is at most max_norm. Returns the pre-clip norm.
template <typename T>
double clip_gradients(ParamStore<T>& params, double max_norm);

}  // namespace swit::nn
