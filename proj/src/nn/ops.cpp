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

#include "swit/nn/ops.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace swit::nn {
namespace {

template <typename T>
Graph<T>& graph_of(const Var<T>& a) {
  if (!a.valid()) throw InvalidArgument("op applied to an empty Var");
  return *a.graph();
}

template <typename T>
Graph<T>& graph_of(const Var<T>& a, const Var<T>& b) {
  if (!a.valid() || !b.valid()) throw InvalidArgument("op applied to an empty Var");
  if (a.graph() != b.graph()) throw InvalidArgument("op mixes Vars from different graphs");
  return *a.graph();
}

[[noreturn]] void shape_error(const char* op, Eigen::Index ar, Eigen::Index ac, Eigen::Index br, Eigen::Index bc) {
  throw ShapeMismatch(std::string(op) + ": incompatible shapes " + std::to_string(ar) + "x" + std::to_string(ac) +
                      " and " + std::to_string(br) + "x" + std::to_string(bc));
}

template <typename T>
void require_same_shape(const char* op, const Var<T>& a, const Var<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, a.rows(), a.cols(), b.rows(), b.cols());
}

}  // namespace

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  auto& g = graph_of(a, b);
  if (a.cols() != b.rows()) shape_error("matmul", a.rows(), a.cols(), b.rows(), b.cols());
  Matrix<T> out = a.value() * b.value();
  return g.record("matmul", std::move(out), a.requires_grad() || b.requires_grad(),
                  [a, b](Graph<T>& g, const Matrix<T>& dy) {
                    if (a.requires_grad()) g.accumulate(a, dy * b.value().transpose());
                    if (b.requires_grad()) g.accumulate(b, a.value().transpose() * dy);
                  });
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& bias) {
  auto& g = graph_of(x, w);
  if (x.cols() != w.rows()) shape_error("linear", x.rows(), x.cols(), w.rows(), w.cols());
  const bool has_bias = bias.valid();
  if (has_bias && (bias.rows() != 1 || bias.cols() != w.cols()))
    shape_error("linear(bias)", bias.rows(), bias.cols(), 1, w.cols());
  Matrix<T> out = x.value() * w.value();
  if (has_bias) out.rowwise() += bias.value().row(0);
  const bool rg = x.requires_grad() || w.requires_grad() || (has_bias && bias.requires_grad());
  return g.record("linear", std::move(out), rg, [x, w, bias, has_bias](Graph<T>& g, const Matrix<T>& dy) {
    if (x.requires_grad()) g.accumulate(x, dy * w.value().transpose());
    if (w.requires_grad()) g.accumulate(w, x.value().transpose() * dy);
    if (has_bias && bias.requires_grad()) g.accumulate(bias, dy.colwise().sum());
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  auto& g = graph_of(a, b);
  require_same_shape("add", a, b);
  Matrix<T> out = a.value() + b.value();
  return g.record("add", std::move(out), a.requires_grad() || b.requires_grad(),
                  [a, b](Graph<T>& g, const Matrix<T>& dy) {
                    g.accumulate(a, dy);
                    g.accumulate(b, dy);
                  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  auto& g = graph_of(a, b);
  require_same_shape("sub", a, b);
  Matrix<T> out = a.value() - b.value();
  return g.record("sub", std::move(out), a.requires_grad() || b.requires_grad(),
                  [a, b](Graph<T>& g, const Matrix<T>& dy) {
                    g.accumulate(a, dy);
                    g.accumulate(b, -dy);
                  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  auto& g = graph_of(a, b);
  require_same_shape("mul", a, b);
  Matrix<T> out = a.value().cwiseProduct(b.value());
  return g.record("mul", std::move(out), a.requires_grad() || b.requires_grad(),
                  [a, b](Graph<T>& g, const Matrix<T>& dy) {
                    if (a.requires_grad()) g.accumulate(a, dy.cwiseProduct(b.value()));
                    if (b.requires_grad()) g.accumulate(b, dy.cwiseProduct(a.value()));
                  });
}

template <typename T>
Var<T> add_row(const Var<T>& a, const Var<T>& row) {
  auto& g = graph_of(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) shape_error("add_row", a.rows(), a.cols(), row.rows(), row.cols());
  Matrix<T> out = a.value();
  out.rowwise() += row.value().row(0);
  return g.record("add_row", std::move(out), a.requires_grad() || row.requires_grad(),
                  [a, row](Graph<T>& g, const Matrix<T>& dy) {
                    g.accumulate(a, dy);
                    if (row.requires_grad()) g.accumulate(row, dy.colwise().sum());
                  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
  auto& g = graph_of(a);
  Matrix<T> out = a.value() * factor;
  return g.record("scale", std::move(out), a.requires_grad(),
                  [a, factor](Graph<T>& g, const Matrix<T>& dy) { g.accumulate(a, dy * factor); });
}

template <typename T>
Var<T> transpose(const Var<T>& a) {
  auto& g = graph_of(a);
  Matrix<T> out = a.value().transpose();
  return g.record("transpose", std::move(out), a.requires_grad(),
                  [a](Graph<T>& g, const Matrix<T>& dy) { g.accumulate(a, dy.transpose()); });
}

template <typename T>
Var<T> concat_rows(std::span<const Var<T>> parts) {
  if (parts.empty()) throw InvalidArgument("concat_rows: no inputs");
  auto& g = graph_of(parts[0]);
  Eigen::Index rows = 0;
  bool rg = false;
  for (const auto& p : parts) {
    graph_of(parts[0], p);
    if (p.cols() != parts[0].cols()) shape_error("concat_rows", parts[0].rows(), parts[0].cols(), p.rows(), p.cols());
    rows += p.rows();
    rg = rg || p.requires_grad();
  }
  Matrix<T> out(rows, parts[0].cols());
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return g.record("concat_rows", std::move(out), rg, [inputs](Graph<T>& g, const Matrix<T>& dy) {
    Eigen::Index r = 0;
    for (const auto& p : inputs) {
      if (p.requires_grad()) g.accumulate(p, dy.middleRows(r, p.rows()));
      r += p.rows();
    }
  });
}

template <typename T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
  if (parts.empty()) throw InvalidArgument("concat_cols: no inputs");
  auto& g = graph_of(parts[0]);
  Eigen::Index cols = 0;
  bool rg = false;
  for (const auto& p : parts) {
    graph_of(parts[0], p);
    if (p.rows() != parts[0].rows()) shape_error("concat_cols", parts[0].rows(), parts[0].cols(), p.rows(), p.cols());
    cols += p.cols();
    rg = rg || p.requires_grad();
  }
  Matrix<T> out(parts[0].rows(), cols);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return g.record("concat_cols", std::move(out), rg, [inputs](Graph<T>& g, const Matrix<T>& dy) {
    Eigen::Index c = 0;
    for (const auto& p : inputs) {
      if (p.requires_grad()) g.accumulate(p, dy.middleCols(c, p.cols()));
      c += p.cols();
    }
  });
}

template <typename T>
Var<T> slice_rows(const Var<T>& a, Eigen::Index start, Eigen::Index count) {
  auto& g = graph_of(a);
  if (start < 0 || count < 0 || start + count > a.rows()) shape_error("slice_rows", a.rows(), a.cols(), start, count);
  Matrix<T> out = a.value().middleRows(start, count);
  return g.record("slice_rows", std::move(out), a.requires_grad(), [a, start, count](Graph<T>& g, const Matrix<T>& dy) {
    Matrix<T> full = Matrix<T>::Zero(a.rows(), a.cols());
    full.middleRows(start, count) = dy;
    g.accumulate(a, full);
  });
}

template <typename T>
Var<T> slice_cols(const Var<T>& a, Eigen::Index start, Eigen::Index count) {
  auto& g = graph_of(a);
  if (start < 0 || count < 0 || start + count > a.cols()) shape_error("slice_cols", a.rows(), a.cols(), start, count);
  Matrix<T> out = a.value().middleCols(start, count);
  return g.record("slice_cols", std::move(out), a.requires_grad(), [a, start, count](Graph<T>& g, const Matrix<T>& dy) {
    Matrix<T> full = Matrix<T>::Zero(a.rows(), a.cols());
    full.middleCols(start, count) = dy;
    g.accumulate(a, full);
  });
}

template <typename T>
Var<T> gather_rows(const Var<T>& a, std::span<const int> index) {
  auto& g = graph_of(a);
  Matrix<T> out(static_cast<Eigen::Index>(index.size()), a.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= a.rows()) throw ShapeMismatch("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(index[i]);
  }
  std::vector<int> idx(index.begin(), index.end());
  return g.record("gather_rows", std::move(out), a.requires_grad(), [a, idx](Graph<T>& g, const Matrix<T>& dy) {
    Matrix<T> full = Matrix<T>::Zero(a.rows(), a.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) full.row(idx[i]) += dy.row(static_cast<Eigen::Index>(i));
    g.accumulate(a, full);
  });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
  auto& g = graph_of(a);
  Matrix<T> out(1, 1);
  out(0, 0) = a.value().sum();
  return g.record("sum", std::move(out), a.requires_grad(), [a](Graph<T>& g, const Matrix<T>& dy) {
    g.accumulate(a, Matrix<T>::Constant(a.rows(), a.cols(), dy(0, 0)));
  });
}

template <typename T>
Var<T> mean(const Var<T>& a) {
  auto& g = graph_of(a);
  if (a.value().size() == 0) throw InvalidArgument("mean: empty input");
  const T n = static_cast<T>(a.value().size());
  Matrix<T> out(1, 1);
  out(0, 0) = a.value().sum() / n;
  return g.record("mean", std::move(out), a.requires_grad(), [a, n](Graph<T>& g, const Matrix<T>& dy) {
    g.accumulate(a, Matrix<T>::Constant(a.rows(), a.cols(), dy(0, 0) / n));
  });
}

template <typename T>
Var<T> weighted_sum(const Var<T>& a, const Matrix<T>& weights) {
  auto& g = graph_of(a);
  if (weights.rows() != a.rows() || weights.cols() != a.cols())
    shape_error("weighted_sum", a.rows(), a.cols(), weights.rows(), weights.cols());
  Matrix<T> out(1, 1);
  out(0, 0) = a.value().cwiseProduct(weights).sum();
  return g.record("weighted_sum", std::move(out), a.requires_grad(), [a, weights](Graph<T>& g, const Matrix<T>& dy) {
    g.accumulate(a, weights * dy(0, 0));
  });
}

template <typename T>
Var<T> softmax_rows(const Var<T>& a) {
  auto& g = graph_of(a);
  Matrix<T> out = a.value();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  const Var<T> y(&g, static_cast<int>(g.size()));  // id of the node recorded below
  return g.record("softmax_rows", std::move(out), a.requires_grad(), [a, y](Graph<T>& g, const Matrix<T>& dy) {
    const Matrix<T>& p = y.value();
    const Eigen::Matrix<T, Eigen::Dynamic, 1> dot = (dy.cwiseProduct(p)).rowwise().sum();
    Matrix<T> dx = dy;
    dx.colwise() -= dot;
    g.accumulate(a, dx.cwiseProduct(p));
  });
}

template <typename T>
Var<T> log_softmax_rows(const Var<T>& a) {
  auto& g = graph_of(a);
  Matrix<T> out = a.value();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    const T m = row.maxCoeff();
    row.array() -= m + std::log((row.array() - m).exp().sum());
  }
  const Var<T> y(&g, static_cast<int>(g.size()));
  return g.record("log_softmax_rows", std::move(out), a.requires_grad(), [a, y](Graph<T>& g, const Matrix<T>& dy) {
    const Eigen::Matrix<T, Eigen::Dynamic, 1> total = dy.rowwise().sum();
    Matrix<T> dx = y.value().array().exp().matrix();
    dx = dy - total.asDiagonal() * dx;
    g.accumulate(a, dx);
  });
}

template <typename T>
Var<T> exp(const Var<T>& a) {
  auto& g = graph_of(a);
  Matrix<T> out = a.value().array().exp().matrix();
  const Var<T> y(&g, static_cast<int>(g.size()));
  return g.record("exp", std::move(out), a.requires_grad(),
                  [a, y](Graph<T>& g, const Matrix<T>& dy) { g.accumulate(a, dy.cwiseProduct(y.value())); });
}

template <typename T>
Var<T> log(const Var<T>& a, T floor) {
  auto& g = graph_of(a);
  Matrix<T> out = a.value().array().max(floor).log().matrix();
  return g.record("log", std::move(out), a.requires_grad(), [a, floor](Graph<T>& g, const Matrix<T>& dy) {
    const auto& x = a.value();
    g.accumulate(a, (x.array() > floor).select(dy.array() / x.array(), T(0)).matrix());
  });
}

template <typename T>
Var<T> gelu(const Var<T>& a) {
  auto& g = graph_of(a);
  const T c = static_cast<T>(std::sqrt(2.0 / std::numbers::pi));
  const T k = static_cast<T>(0.044715);
  const auto& x = a.value().array();
  Matrix<T> t = (c * (x + k * x.cube())).tanh().matrix();
  Matrix<T> out = (T(0.5) * x * (T(1) + t.array())).matrix();
  return g.record("gelu", std::move(out), a.requires_grad(),
                  [a, t = std::move(t), c, k](Graph<T>& g, const Matrix<T>& dy) {
                    const auto& x = a.value().array();
                    const auto tt = t.array();
                    const auto d = T(0.5) * (T(1) + tt) + T(0.5) * x * (T(1) - tt.square()) * c * (T(1) + T(3) * k * x.square());
                    g.accumulate(a, (dy.array() * d).matrix());
                  });
}

template <typename T>
Var<T> layer_norm_rows(const Var<T>& a, T gain, T eps) {
  auto& g = graph_of(a);
  const Eigen::Index n = a.cols();
  if (n == 0) throw InvalidArgument("layer_norm_rows: zero-width input");
  Matrix<T> xhat = a.value();
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std(a.rows());
  for (Eigen::Index i = 0; i < xhat.rows(); ++i) {
    auto row = xhat.row(i);
    const T mu = row.mean();
    row.array() -= mu;
    const T var = row.squaredNorm() / static_cast<T>(n);
    inv_std(i) = T(1) / std::sqrt(var + eps);
    row *= inv_std(i);
  }
  Matrix<T> out = xhat * gain;
  return g.record("layer_norm", std::move(out), a.requires_grad(),
                  [a, xhat = std::move(xhat), inv_std = std::move(inv_std), gain, n](Graph<T>& g, const Matrix<T>& dy) {
                    Matrix<T> dxhat = dy * gain;
                    const Eigen::Matrix<T, Eigen::Dynamic, 1> mean_d = dxhat.rowwise().mean();
                    const Eigen::Matrix<T, Eigen::Dynamic, 1> mean_dx = (dxhat.cwiseProduct(xhat)).rowwise().sum() / static_cast<T>(n);
                    Matrix<T> dx = dxhat;
                    dx.colwise() -= mean_d;
                    dx -= mean_dx.asDiagonal() * xhat;
                    dx = inv_std.asDiagonal() * dx;
                    g.accumulate(a, dx);
                  });
}

template <typename T>
Var<T> stop_gradient(const Var<T>& a) {
  auto& g = graph_of(a);
  return g.record("stop_gradient", a.value(), false, nullptr);
}

template <typename T>
Var<T> attention(const Var<T>& q, const Var<T>& k, const Var<T>& v, Eigen::Index num_seqs, Eigen::Index q_len,
                 Eigen::Index kv_len, int heads) {
  auto& g = graph_of(q, k);
  graph_of(q, v);
  const Eigen::Index width = q.cols();
  if (heads < 1 || width % heads != 0) throw InvalidArgument("attention: width not divisible by head count");
  if (q.rows() != num_seqs * q_len) shape_error("attention(q)", q.rows(), q.cols(), num_seqs, q_len);
  if (k.rows() != num_seqs * kv_len || k.cols() != width) shape_error("attention(k)", k.rows(), k.cols(), num_seqs, kv_len);
  if (v.rows() != num_seqs * kv_len || v.cols() != width) shape_error("attention(v)", v.rows(), v.cols(), num_seqs, kv_len);
  const Eigen::Index hd = width / heads;
  const T scale_factor = T(1) / std::sqrt(static_cast<T>(hd));

  Matrix<T> out(q.rows(), width);
  // Attention weights, one q_len x kv_len block per (sequence, head).
  Matrix<T> probs(num_seqs * heads * q_len, kv_len);
  const auto& Q = q.value();
  const auto& K = k.value();
  const auto& V = v.value();
  for (Eigen::Index s = 0; s < num_seqs; ++s) {
    for (int h = 0; h < heads; ++h) {
      auto p = probs.middleRows((s * heads + h) * q_len, q_len);
      p.noalias() = Q.block(s * q_len, h * hd, q_len, hd) * K.block(s * kv_len, h * hd, kv_len, hd).transpose();
      p *= scale_factor;
      for (Eigen::Index i = 0; i < q_len; ++i) {
        auto row = p.row(i);
        row.array() -= row.maxCoeff();
        row = row.array().exp().matrix();
        row /= row.sum();
      }
      out.block(s * q_len, h * hd, q_len, hd).noalias() = p * V.block(s * kv_len, h * hd, kv_len, hd);
    }
  }
  const bool rg = q.requires_grad() || k.requires_grad() || v.requires_grad();
  return g.record(
      "attention", std::move(out), rg,
      [q, k, v, probs = std::move(probs), num_seqs, q_len, kv_len, heads, hd, scale_factor](Graph<T>& g,
                                                                                              const Matrix<T>& dy) {
        const auto& Q = q.value();
        const auto& K = k.value();
        const auto& V = v.value();
        Matrix<T> dq = Matrix<T>::Zero(Q.rows(), Q.cols());
        Matrix<T> dk = Matrix<T>::Zero(K.rows(), K.cols());
        Matrix<T> dv = Matrix<T>::Zero(V.rows(), V.cols());
        Matrix<T> dp(q_len, kv_len);
        for (Eigen::Index s = 0; s < num_seqs; ++s) {
          for (int h = 0; h < heads; ++h) {
            const auto p = probs.middleRows((s * heads + h) * q_len, q_len);
            const auto dout = dy.block(s * q_len, h * hd, q_len, hd);
            const auto vs = V.block(s * kv_len, h * hd, kv_len, hd);
            dv.block(s * kv_len, h * hd, kv_len, hd).noalias() += p.transpose() * dout;
            dp.noalias() = dout * vs.transpose();
            const Eigen::Matrix<T, Eigen::Dynamic, 1> dot = (dp.cwiseProduct(p)).rowwise().sum();
            dp.colwise() -= dot;
            dp = dp.cwiseProduct(p) * scale_factor;
            dq.block(s * q_len, h * hd, q_len, hd).noalias() += dp * K.block(s * kv_len, h * hd, kv_len, hd);
            dk.block(s * kv_len, h * hd, kv_len, hd).noalias() += dp.transpose() * Q.block(s * q_len, h * hd, q_len, hd);
          }
        }
        if (q.requires_grad()) g.accumulate(q, dq);
        if (k.requires_grad()) g.accumulate(k, dk);
        if (v.requires_grad()) g.accumulate(v, dv);
      });
}

template <typename T>
Var<T> add_tiled(const Var<T>& x, const Var<T>& table, Eigen::Index num_seqs) {
  auto& g = graph_of(x, table);
  const Eigen::Index len = table.rows();
  if (x.rows() != num_seqs * len || x.cols() != table.cols())
    shape_error("add_tiled", x.rows(), x.cols(), table.rows(), table.cols());
  Matrix<T> out = x.value();
  for (Eigen::Index s = 0; s < num_seqs; ++s) out.middleRows(s * len, len) += table.value();
  return g.record("add_tiled", std::move(out), x.requires_grad() || table.requires_grad(),
                  [x, table, num_seqs, len](Graph<T>& g, const Matrix<T>& dy) {
                    g.accumulate(x, dy);
                    if (table.requires_grad()) {
                      Matrix<T> acc = Matrix<T>::Zero(len, dy.cols());
                      for (Eigen::Index s = 0; s < num_seqs; ++s) acc += dy.middleRows(s * len, len);
                      g.accumulate(table, acc);
                    }
                  });
}

template <typename T>
Var<T> prepend_per_seq(const Var<T>& prefix, const Var<T>& x, Eigen::Index num_seqs) {
  auto& g = graph_of(prefix, x);
  if (num_seqs < 1 || x.rows() % num_seqs != 0) throw InvalidArgument("prepend_per_seq: rows not divisible by num_seqs");
  if (prefix.rows() != 1 || prefix.cols() != x.cols())
    shape_error("prepend_per_seq", prefix.rows(), prefix.cols(), x.rows(), x.cols());
  const Eigen::Index len = x.rows() / num_seqs;
  Matrix<T> out(num_seqs * (len + 1), x.cols());
  for (Eigen::Index s = 0; s < num_seqs; ++s) {
    out.row(s * (len + 1)) = prefix.value().row(0);
    out.middleRows(s * (len + 1) + 1, len) = x.value().middleRows(s * len, len);
  }
  return g.record("prepend_per_seq", std::move(out), prefix.requires_grad() || x.requires_grad(),
                  [prefix, x, num_seqs, len](Graph<T>& g, const Matrix<T>& dy) {
                    if (prefix.requires_grad()) {
                      Matrix<T> acc = Matrix<T>::Zero(1, dy.cols());
                      for (Eigen::Index s = 0; s < num_seqs; ++s) acc += dy.row(s * (len + 1));
                      g.accumulate(prefix, acc);
                    }
                    if (x.requires_grad()) {
                      Matrix<T> dx(num_seqs * len, dy.cols());
                      for (Eigen::Index s = 0; s < num_seqs; ++s)
                        dx.middleRows(s * len, len) = dy.middleRows(s * (len + 1) + 1, len);
                      g.accumulate(x, dx);
                    }
                  });
}

#define SWIT_INSTANTIATE_OPS(T)                                                                                   \
  template Var<T> matmul(const Var<T>&, const Var<T>&);                                                           \
  template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);                                            \
  template Var<T> add(const Var<T>&, const Var<T>&);                                                              \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                                              \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                                              \
  template Var<T> add_row(const Var<T>&, const Var<T>&);                                                          \
  template Var<T> scale(const Var<T>&, T);                                                                        \
  template Var<T> transpose(const Var<T>&);                                                                       \
  template Var<T> concat_rows(std::span<const Var<T>>);                                                           \
  template Var<T> concat_cols(std::span<const Var<T>>);                                                           \
  template Var<T> slice_rows(const Var<T>&, Eigen::Index, Eigen::Index);                                          \
  template Var<T> slice_cols(const Var<T>&, Eigen::Index, Eigen::Index);                                          \
  template Var<T> gather_rows(const Var<T>&, std::span<const int>);                                               \
  template Var<T> sum(const Var<T>&);                                                                             \
  template Var<T> mean(const Var<T>&);                                                                            \
  template Var<T> weighted_sum(const Var<T>&, const Matrix<T>&);                                                  \
  template Var<T> softmax_rows(const Var<T>&);                                                                    \
  template Var<T> log_softmax_rows(const Var<T>&);                                                                \
  template Var<T> exp(const Var<T>&);                                                                             \
  template Var<T> log(const Var<T>&, T);                                                                          \
  template Var<T> gelu(const Var<T>&);                                                                            \
  template Var<T> layer_norm_rows(const Var<T>&, T, T);                                                           \
  template Var<T> stop_gradient(const Var<T>&);                                                                   \
  template Var<T> attention(const Var<T>&, const Var<T>&, const Var<T>&, Eigen::Index, Eigen::Index, Eigen::Index, \
                            int);                                                                                 \
  template Var<T> add_tiled(const Var<T>&, const Var<T>&, Eigen::Index);                                          \
  template Var<T> prepend_per_seq(const Var<T>&, const Var<T>&, Eigen::Index);

SWIT_INSTANTIATE_OPS(float)
SWIT_INSTANTIATE_OPS(double)

}  // namespace swit::nn
