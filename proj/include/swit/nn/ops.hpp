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

#include <span>
#include <vector>

#include "swit/nn/graph.hpp"

/// Differentiable primitives. Every op checks shapes (ShapeMismatch) and, when
/// the graph checks finiteness, raises NumericError naming the op on NaN/Inf.
namespace swit::nn {

template <typename T> Var<T> matmul(const Var<T>& a, const Var<T>& b);
/// x * w + bias, bias broadcast over rows. `bias` may be an invalid Var.
template <typename T> Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& bias);
template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
/// a + row, with the 1 x cols `row` broadcast over every row of a.
template <typename T> Var<T> add_row(const Var<T>& a, const Var<T>& row);
template <typename T> Var<T> scale(const Var<T>& a, T factor);
template <typename T> Var<T> transpose(const Var<T>& a);

template <typename T> Var<T> concat_rows(std::span<const Var<T>> parts);
template <typename T> Var<T> concat_cols(std::span<const Var<T>> parts);
template <typename T> Var<T> slice_rows(const Var<T>& a, Eigen::Index start, Eigen::Index count);
template <typename T> Var<T> slice_cols(const Var<T>& a, Eigen::Index start, Eigen::Index count);
/// Row i of the output is row index[i] of a; repeated indices accumulate in backward.
template <typename T> Var<T> gather_rows(const Var<T>& a, std::span<const int> index);

template <typename T> Var<T> sum(const Var<T>& a);
template <typename T> Var<T> mean(const Var<T>& a);
/// sum_ij weights_ij * a_ij against a constant weight matrix.
template <typename T> Var<T> weighted_sum(const Var<T>& a, const Matrix<T>& weights);

template <typename T> Var<T> softmax_rows(const Var<T>& a);
/// Row-wise log(softmax(a)), computed without forming the softmax first.
template <typename T> Var<T> log_softmax_rows(const Var<T>& a);
template <typename T> Var<T> exp(const Var<T>& a);
/// log(max(a, floor)); entries at the floor pass no gradient.
template <typename T> Var<T> log(const Var<T>& a, T floor = T(1e-12));
/// GeLU, tanh approximation.
template <typename T> Var<T> gelu(const Var<T>& a);
/// Standardizes each row with variance epsilon `eps`, then multiplies by `gain`.
template <typename T> Var<T> layer_norm_rows(const Var<T>& a, T gain, T eps);

/// Forward identity; no adjoint flows through.
template <typename T> Var<T> stop_gradient(const Var<T>& a);

/// Batched scaled dot-product attention over `num_seqs` independent sequences.
/// q holds num_seqs*q_len rows, k and v hold num_seqs*kv_len rows; columns are
/// split into `heads` equal groups, each scaled by 1/sqrt(head_dim).
template <typename T>
Var<T> attention(const Var<T>& q, const Var<T>& k, const Var<T>& v, Eigen::Index num_seqs, Eigen::Index q_len,
                 Eigen::Index kv_len, int heads);

/// x (num_seqs*len rows) + table tiled num_seqs times (table has len rows).
template <typename T> Var<T> add_tiled(const Var<T>& x, const Var<T>& table, Eigen::Index num_seqs);
/// Inserts the 1 x cols `prefix` in front of each of the num_seqs blocks of x.
template <typename T> Var<T> prepend_per_seq(const Var<T>& prefix, const Var<T>& x, Eigen::Index num_seqs);

}  // namespace swit::nn
