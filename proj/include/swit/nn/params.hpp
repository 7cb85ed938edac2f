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

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "swit/nn/graph.hpp"
#include "swit/rng.hpp"

namespace swit::nn {

template <typename T>
struct Parameter {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;
  Matrix<T> m;  // AdamW first moment
  Matrix<T> v;  // AdamW second moment
  bool decay = true;
};

/// Named parameters in insertion order. Names are unique and iteration order is
/// deterministic, so two stores built by the same code line up entry by entry.
template <typename T>
class ParamStore {
 public:
  Parameter<T>& add(std::string name, Matrix<T> value, bool decay = true) {
    if (index_.count(name)) throw InvalidArgument("ParamStore: duplicate parameter " + name);
    index_.emplace(name, params_.size());
    Parameter<T> p;
    p.name = std::move(name);
    p.grad = Matrix<T>::Zero(value.rows(), value.cols());
    p.m = Matrix<T>::Zero(value.rows(), value.cols());
    p.v = Matrix<T>::Zero(value.rows(), value.cols());
    p.value = std::move(value);
    p.decay = decay;
    params_.push_back(std::move(p));
    return params_.back();
  }

  /// Gaussian-initialized parameter.
  Parameter<T>& add_normal(std::string name, Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng,
                           bool decay = true) {
    Matrix<T> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(rng.normal(0.0, stddev));
    return add(std::move(name), std::move(m), decay);
  }

  Parameter<T>& add_zeros(std::string name, Eigen::Index rows, Eigen::Index cols, bool decay = false) {
    return add(std::move(name), Matrix<T>::Zero(rows, cols), decay);
  }

  bool contains(std::string_view name) const { return index_.count(std::string(name)) > 0; }
  std::size_t index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw InvalidArgument("ParamStore: unknown parameter " + std::string(name));
    return it->second;
  }
  Parameter<T>& at(std::string_view name) { return params_[index_of(name)]; }
  const Parameter<T>& at(std::string_view name) const { return params_[index_of(name)]; }

  std::vector<Parameter<T>>& entries() { return params_; }
  const std::vector<Parameter<T>>& entries() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t num_elements() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  void zero_grads() {
    for (auto& p : params_) p.grad.setZero();
  }

  /// Same names, shapes and decay flags; values converted; optimizer moments reset.
  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& p : params_) out.add(p.name, p.value.template cast<U>(), p.decay);
    return out;
  }

 private:
  std::vector<Parameter<T>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// A ParamStore's values placed into a Graph, either as trainable variables or
/// as constants (e.g. the gradient-isolated target branch).
template <typename T>
class Bound {
 public:
  Bound(Graph<T>& graph, const ParamStore<T>& store, bool trainable) : store_(&store) {
    vars_.reserve(store.size());
    for (const auto& p : store.entries())
      vars_.push_back(trainable ? graph.variable(p.value) : graph.constant(p.value));
  }

  Var<T> operator[](std::string_view name) const { return vars_[store_->index_of(name)]; }
  const std::vector<Var<T>>& vars() const { return vars_; }

  /// Copies adjoints into store grads; parameters not reached get zero.
  void collect_grads(ParamStore<T>& store) const {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      auto& p = store.entries()[i];
      const auto& g = vars_[i].grad();
      if (g.size() == 0)
        p.grad.setZero(p.value.rows(), p.value.cols());
      else
        p.grad = g;
    }
  }

 private:
  const ParamStore<T>* store_;
  std::vector<Var<T>> vars_;
};

}  // namespace swit::nn
