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

#include <functional>
#include <string>

#include "swit/nn/params.hpp"

namespace swit::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t evaluations = 0;
  bool passed = false;
};

using ScalarFn = std::function<Var<double>(Graph<double>&, const Bound<double>&)>;

/// Compares reverse-mode gradients of `f` against central finite differences
/// (step `step`) for every parameter entry. The error for one parameter tensor
/// is ||analytic - numeric|| / max(||analytic||, ||numeric||, 1e-6); the report
/// carries the maximum over tensors and passes iff it is <= tol.
GradCheckReport grad_check(ParamStore<double>& params, const ScalarFn& f, double tol = 1e-4, double step = 1e-5);

}  // namespace swit::nn
