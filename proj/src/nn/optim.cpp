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

#include "swit/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace swit::nn {

template <typename T>
void adamw_step(ParamStore<T>& params, double lr, double weight_decay, std::int64_t step, const AdamWConfig& config) {
  if (step < 1) throw InvalidArgument("adamw_step: step is 1-based");
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  const T b1 = static_cast<T>(config.beta1);
  const T b2 = static_cast<T>(config.beta2);
  const T step_size = static_cast<T>(lr / bc1);
  const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
  const T eps = static_cast<T>(config.eps);
  const T decay = static_cast<T>(1.0 - lr * weight_decay);
  for (auto& p : params.entries()) {
    if (p.decay && weight_decay != 0.0) p.value *= decay;
    p.m = b1 * p.m + (T(1) - b1) * p.grad;
    p.v = b2 * p.v + (T(1) - b2) * p.grad.cwiseAbs2();
    p.value.array() -= step_size * p.m.array() / (p.v.array().sqrt() * inv_sqrt_bc2 + eps);
  }
}

double cosine_schedule(double step, double total, double start, double end, double warmup_steps) {
  if (warmup_steps > 0.0 && step < warmup_steps) return start * step / warmup_steps;
  const double span = total - warmup_steps;
  if (span <= 0.0) return start;
  const double progress = std::clamp((step - warmup_steps) / span, 0.0, 1.0);
  return end + (start - end) * 0.5 * (std::cos(std::numbers::pi * progress) + 1.0);
}

double ema_momentum(double epoch, double total_epochs, double base) {
  return 1.0 - (1.0 - base) * (std::cos(std::numbers::pi * epoch / total_epochs) + 1.0) / 2.0;
}

double cosine_ramp(double epoch, double total_epochs, double start, double end) {
  return end - (end - start) * (std::cos(std::numbers::pi * epoch / total_epochs) + 1.0) / 2.0;
}

template <typename T>
double global_grad_norm(const ParamStore<T>& params) {
  double sq = 0.0;
  for (const auto& p : params.entries()) sq += p.grad.template cast<double>().squaredNorm();
  return std::sqrt(sq);
}

template <typename T>
double clip_gradients(ParamStore<T>& params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const T factor = static_cast<T>(max_norm / norm);
    for (auto& p : params.entries()) p.grad *= factor;
    // Rounding in T can leave the norm a few ulps above the cap; nudge it under.
    const T shrink = T(1) - T(4) * std::numeric_limits<T>::epsilon();
    for (int i = 0; i < 8 && global_grad_norm(params) > max_norm; ++i)
      for (auto& p : params.entries()) p.grad *= shrink;
  }
  return norm;
}

template void adamw_step(ParamStore<float>&, double, double, std::int64_t, const AdamWConfig&);
template void adamw_step(ParamStore<double>&, double, double, std::int64_t, const AdamWConfig&);
template double global_grad_norm(const ParamStore<float>&);
template double global_grad_norm(const ParamStore<double>&);
template double clip_gradients(ParamStore<float>&, double);
template double clip_gradients(ParamStore<double>&, double);

}  // namespace swit::nn
