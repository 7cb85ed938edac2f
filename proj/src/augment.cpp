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

#include "swit/augment.hpp"

#include <cmath>
#include <string>

#include "swit/error.hpp"

namespace swit {

void AugmentPolicy::validate() const {
  auto check_recipe = [](const ViewRecipe& r, const char* name) {
    for (double p : {r.p_rss, r.p_rsf, r.p_rgo, r.p_rfc, r.p_rsc, r.p_normalize, r.p_noise})
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(std::string("augment: probability outside [0,1] in ") + name);
    if (!(r.crop_fraction > 0.0 && r.crop_fraction <= 1.0))
      throw InvalidArgument(std::string("augment: crop fraction outside (0,1] in ") + name);
    if (r.target_length < 2) throw InvalidArgument(std::string("augment: target length < 2 in ") + name);
  };
  check_recipe(global1, "global1");
  check_recipe(global2, "global2");
  check_recipe(local, "local");
  if (num_local < 0) throw InvalidArgument("augment: num_local must be >= 0");
  if (rgo_max < 0.0 || rfc_sigma_min <= 0.0 || rfc_sigma_max < rfc_sigma_min || noise_sigma < 0.0)
    throw InvalidArgument("augment: invalid distribution ranges");
}

TokenSequence to_real_repr(const Eigen::MatrixXcd& channel) {
  const Eigen::Index nr = channel.rows();
  TokenSequence seq;
  seq.tokens.resize(channel.cols(), 3 * nr);
  for (Eigen::Index n = 0; n < channel.cols(); ++n)
    for (Eigen::Index a = 0; a < nr; ++a) {
      const auto h = channel(a, n);
      seq.tokens(n, a) = h.real();
      seq.tokens(n, nr + a) = h.imag();
      seq.tokens(n, 2 * nr + a) = std::abs(h);
    }
  return seq;
}

TokenSequence to_real_repr(const ChannelMatrix& channel) { return to_real_repr(Eigen::MatrixXcd(channel.cast<std::complex<double>>())); }

RowMatrix resize_tokens(const Eigen::Ref<const RowMatrix>& block, int target_length) {
  const Eigen::Index n = block.rows();
  if (n < 1 || target_length < 1) throw InvalidArgument("resize_tokens: empty input or target");
  RowMatrix out(target_length, block.cols());
  if (n == 1 || target_length == 1) {
    for (int j = 0; j < target_length; ++j) out.row(j) = block.row(0);
    return out;
  }
  for (int j = 0; j < target_length; ++j) {
    const double pos = static_cast<double>(j) * static_cast<double>(n - 1) / static_cast<double>(target_length - 1);
    auto lo = static_cast<Eigen::Index>(std::floor(pos));
    if (lo >= n - 1) lo = n - 2;
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0)
      out.row(j) = block.row(lo);
    else if (frac == 1.0)
      out.row(j) = block.row(lo + 1);
    else
      out.row(j) = (1.0 - frac) * block.row(lo) + frac * block.row(lo + 1);
  }
  return out;
}

Eigen::Index rss_block_length(Eigen::Index length, double crop_fraction) {
  // The small epsilon guards products such as 0.9 * 30 that land just below an integer.
  return static_cast<Eigen::Index>(std::floor(crop_fraction * static_cast<double>(length) + 1e-9));
}

TokenSequence rss_at(const TokenSequence& seq, Eigen::Index start, Eigen::Index block, int target_length) {
  if (block < 2) throw InvalidArgument("rss: selected block shorter than 2 tokens");
  if (start < 0 || start + block > seq.length()) throw InvalidArgument("rss: crop window outside sequence");
  return TokenSequence{resize_tokens(seq.tokens.middleRows(start, block), target_length)};
}

TokenSequence rss(const TokenSequence& seq, double crop_fraction, int target_length, Rng& rng) {
  const Eigen::Index block = rss_block_length(seq.length(), crop_fraction);
  if (block < 2) throw InvalidArgument("rss: floor(gamma * length) must be >= 2");
  const auto start = static_cast<Eigen::Index>(rng.integer(0, static_cast<std::int64_t>(seq.length() - block)));
  return rss_at(seq, start, block, target_length);
}

TokenSequence rsf(const TokenSequence& seq) { return TokenSequence{seq.tokens.colwise().reverse()}; }

TokenSequence scale_all(const TokenSequence& seq, double factor) { return TokenSequence{seq.tokens * factor}; }

TokenSequence rgo(const TokenSequence& seq, Rng& rng, double rgo_max) {
  const double xi = rng.uniform(0.0, rgo_max);
  const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
  return scale_all(seq, 1.0 + sign * xi);
}

TokenSequence rfc_with_sigma(const TokenSequence& seq, double sigma) {
  TokenSequence out = seq;
  const Eigen::Index nr = seq.num_antennas();
  const double s2 = sigma * sigma;
  auto abs_part = out.tokens.rightCols(nr);
  abs_part = abs_part.unaryExpr([s2](double h) { return h / s2 * std::exp(-h * h / (2.0 * s2)); });
  return out;
}

TokenSequence rfc(const TokenSequence& seq, Rng& rng, double sigma_min, double sigma_max) {
  return rfc_with_sigma(seq, rng.uniform(sigma_min, sigma_max));
}

TokenSequence rsc(const TokenSequence& seq) { return TokenSequence{-seq.tokens}; }

TokenSequence normalize(const TokenSequence& seq, const Normalization& norm) {
  if (!(norm.re > 0.0) || !(norm.im > 0.0) || !(norm.abs > 0.0))
    throw InvalidArgument("normalize: constants must be positive");
  const Eigen::Index nr = seq.num_antennas();
  TokenSequence out = seq;
  out.tokens.leftCols(nr) /= norm.re;
  out.tokens.middleCols(nr, nr) /= norm.im;
  out.tokens.rightCols(nr) /= norm.abs;
  return out;
}

TokenSequence gaussian_noise(const TokenSequence& seq, double sigma, Rng& rng) {
  if (sigma < 0.0) throw InvalidArgument("gaussian_noise: sigma must be >= 0");
  TokenSequence out = seq;
  if (sigma == 0.0) return out;
  for (Eigen::Index i = 0; i < out.tokens.rows(); ++i)
    for (Eigen::Index j = 0; j < out.tokens.cols(); ++j) out.tokens(i, j) += rng.normal(0.0, sigma);
  return out;
}

TokenSequence make_view(const TokenSequence& base, const ViewRecipe& recipe, const AugmentPolicy& policy,
                        const Normalization& norm, Rng& rng) {
  // Every coin is drawn even when its transform is skipped so the stream layout
  // does not depend on outcomes.
  TokenSequence view = base;
  if (rng.bernoulli(recipe.p_rss))
    view = rss(view, recipe.crop_fraction, recipe.target_length, rng);
  else
    view = TokenSequence{resize_tokens(view.tokens, recipe.target_length)};
  if (rng.bernoulli(recipe.p_rsf)) view = rsf(view);
  if (rng.bernoulli(recipe.p_rgo)) view = rgo(view, rng, policy.rgo_max);
  if (rng.bernoulli(recipe.p_rfc)) view = rfc(view, rng, policy.rfc_sigma_min, policy.rfc_sigma_max);
  if (rng.bernoulli(recipe.p_rsc)) view = rsc(view);
  if (rng.bernoulli(recipe.p_normalize)) view = normalize(view, norm);
  if (rng.bernoulli(recipe.p_noise)) view = gaussian_noise(view, policy.noise_sigma, rng);
  return view;
}

std::vector<TokenSequence> make_views(const ChannelMatrix& channel, const AugmentPolicy& policy,
                                      const Normalization& norm, Rng& rng) {
  return make_views(to_real_repr(channel), policy, norm, rng);
}

std::vector<TokenSequence> make_views(const TokenSequence& base, const AugmentPolicy& policy,
                                      const Normalization& norm, Rng& rng) {
  policy.validate();
  std::vector<TokenSequence> views;
  views.reserve(policy.num_views());
  views.push_back(make_view(base, policy.global1, policy, norm, rng));
  views.push_back(make_view(base, policy.global2, policy, norm, rng));
  for (int i = 0; i < policy.num_local; ++i) views.push_back(make_view(base, policy.local, policy, norm, rng));
  return views;
}

}  // namespace swit
