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

#include "swit/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace swit::nn {
namespace {

// Gradients smaller than this are compared in absolute terms; FD rounding noise
// in double with a 1e-5 step sits around 1e-11.
constexpr double kNormFloor = 1e-6;

double evaluate(ParamStore<double>& params, const ScalarFn& f) {
  Graph<double> g;
  Bound<double> bound(g, params, false);
  const Var<double> out = f(g, bound);
  if (out.rows() != 1 || out.cols() != 1) throw InvalidArgument("grad_check: function must return a scalar");
  return out.value()(0, 0);
}

}  // namespace

GradCheckReport grad_check(ParamStore<double>& params, const ScalarFn& f, double tol, double step) {
  GradCheckReport report;
  {
    Graph<double> g;
    Bound<double> bound(g, params, true);
    const Var<double> out = f(g, bound);
    g.backward(out);
    bound.collect_grads(params);
  }
  for (auto& p : params.entries()) {
    Matrix<double> numeric(p.value.rows(), p.value.cols());
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      double& x = p.value.data()[i];
      const double saved = x;
      x = saved + step;
      const double up = evaluate(params, f);
      x = saved - step;
      const double down = evaluate(params, f);
      x = saved;
      numeric.data()[i] = (up - down) / (2.0 * step);
      report.evaluations += 2;
    }
    const double denom = std::max({p.grad.norm(), numeric.norm(), kNormFloor});
    const double err = (p.grad - numeric).norm() / denom;
    if (report.worst_parameter.empty() || err > report.max_rel_error) {
      report.max_rel_error = err;
      report.worst_parameter = p.name;
    }
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

}  // namespace swit::nn
