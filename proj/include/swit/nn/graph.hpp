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

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "swit/error.hpp"

namespace swit::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
template <typename T>
class Var {
 public:
  Var() = default;
  Var(Graph<T>* graph, int id) : graph_(graph), id_(id) {}

  const Matrix<T>& value() const { return graph_->value(*this); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool requires_grad() const { return graph_->requires_grad(*this); }
  /// Accumulated adjoint after Graph::backward; empty when none reached this node.
  const Matrix<T>& grad() const { return graph_->grad(*this); }

  Graph<T>* graph() const { return graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  Graph<T>* graph_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode tape over dense row-major matrices.
///
/// Nodes are appended in evaluation order; backward() walks them in reverse,
/// invoking each recorded adjoint rule once. Nodes whose inputs do not require
/// gradients record no rule, which is how constants and stop-gradient work.
template <typename T>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const Matrix<T>& out_grad)>;

  explicit Graph(bool check_finite = true) : check_finite_(check_finite) { nodes_.reserve(256); }
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<T> constant(Matrix<T> value) { return push("constant", std::move(value), false, nullptr); }
  Var<T> variable(Matrix<T> value) { return push("variable", std::move(value), true, nullptr); }

  /// Adds an op output. `fn` is dropped when `requires_grad` is false.
  Var<T> record(const char* op, Matrix<T> value, bool requires_grad, BackwardFn fn) {
    return push(op, std::move(value), requires_grad, requires_grad ? std::move(fn) : nullptr);
  }

  const Matrix<T>& value(const Var<T>& v) const { return nodes_[v.id()].value; }
  bool requires_grad(const Var<T>& v) const { return nodes_[v.id()].requires_grad; }
  const Matrix<T>& grad(const Var<T>& v) const { return nodes_[v.id()].grad; }

  template <typename Expr>
  void accumulate(const Var<T>& v, const Expr& expr) {
    Node& n = nodes_[v.id()];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0)
      n.grad = expr;
    else
      n.grad += expr;
  }

  /// Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be 1x1.
  void backward(const Var<T>& loss) {
    if (loss.graph() != this) throw InvalidArgument("backward: loss belongs to another graph");
    const Node& l = nodes_[loss.id()];
    if (l.value.rows() != 1 || l.value.cols() != 1) throw InvalidArgument("backward: loss must be a scalar");
    for (auto& n : nodes_) n.grad.resize(0, 0);
    if (!l.requires_grad) return;
    nodes_[loss.id()].grad = Matrix<T>::Ones(1, 1);
    for (int i = loss.id(); i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.backward || n.grad.size() == 0) continue;
      n.backward(*this, n.grad);
    }
  }

  std::size_t size() const { return nodes_.size(); }
  bool check_finite() const { return check_finite_; }

 private:
  // x * 0 is NaN exactly for non-finite x, and the sum vectorizes.
  static bool all_finite(const Matrix<T>& m) { return !std::isnan((m.array() * T(0)).sum()); }

  struct Node {
    Matrix<T> value;
    Matrix<T> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var<T> push(const char* op, Matrix<T> value, bool requires_grad, BackwardFn fn) {
    if (check_finite_ && !all_finite(value)) throw NumericError(std::string("non-finite value produced by ") + op);
    nodes_.push_back(Node{std::move(value), Matrix<T>(), requires_grad, std::move(fn)});
    return Var<T>(this, static_cast<int>(nodes_.size()) - 1);
  }

  bool check_finite_;
  std::vector<Node> nodes_;
};

}  // namespace swit::nn
