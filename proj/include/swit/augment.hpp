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

#include <vector>

#include <Eigen/Core>

#include "swit/channel_sim.hpp"
#include "swit/rng.hpp"

namespace swit {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Real-valued channel view: one row per subcarrier token, columns laid out as
/// [0, N_r) real, [N_r, 2N_r) imaginary, [2N_r, 3N_r) absolute.
struct TokenSequence {
  RowMatrix tokens;

  Eigen::Index length() const { return tokens.rows(); }
  Eigen::Index width() const { return tokens.cols(); }
  Eigen::Index num_antennas() const { return tokens.cols() / 3; }
};

/// Probabilities and crop settings for one view family.
struct ViewRecipe {
  double crop_fraction = 1.0;
  int target_length = 36;
  double p_rss = 1.0;
  double p_rsf = 0.0;
  double p_rgo = 0.0;
  double p_rfc = 0.0;
  double p_rsc = 0.0;
  double p_normalize = 1.0;
  double p_noise = 0.0;
};

struct AugmentPolicy {
  ViewRecipe global1{0.9, 36, 1.0, 0.4, 0.2, 0.0, 0.0, 1.0, 0.2};
  ViewRecipe global2{0.8, 36, 1.0, 0.4, 0.8, 0.1, 0.2, 1.0, 0.2};
  ViewRecipe local{0.1, 16, 1.0, 0.4, 0.0, 0.0, 0.0, 1.0, 0.0};
  int num_local = 8;
  double rgo_max = 0.1;
  double rfc_sigma_min = 0.5;
  double rfc_sigma_max = 0.6;
  double noise_sigma = 0.01;

  int num_views() const { return 2 + num_local; }
  void validate() const;
};

TokenSequence to_real_repr(const Eigen::MatrixXcd& channel);
TokenSequence to_real_repr(const ChannelMatrix& channel);

/// Piecewise-linear resize along the token axis, endpoints preserved.
RowMatrix resize_tokens(const Eigen::Ref<const RowMatrix>& block, int target_length);

/// Random contiguous crop of floor(fraction * length) tokens resized to target_length.
TokenSequence rss(const TokenSequence& seq, double crop_fraction, int target_length, Rng& rng);
/// Deterministic crop at `start`; the building block of rss.
TokenSequence rss_at(const TokenSequence& seq, Eigen::Index start, Eigen::Index block, int target_length);
Eigen::Index rss_block_length(Eigen::Index length, double crop_fraction);

TokenSequence rsf(const TokenSequence& seq);

TokenSequence scale_all(const TokenSequence& seq, double factor);
/// Draws xi ~ U(0, rgo_max) and a fair sign, then scales every entry by 1 +/- xi.
TokenSequence rgo(const TokenSequence& seq, Rng& rng, double rgo_max = 0.1);

TokenSequence rfc_with_sigma(const TokenSequence& seq, double sigma);
TokenSequence rfc(const TokenSequence& seq, Rng& rng, double sigma_min = 0.5, double sigma_max = 0.6);

TokenSequence rsc(const TokenSequence& seq);

TokenSequence normalize(const TokenSequence& seq, const Normalization& norm);

TokenSequence gaussian_noise(const TokenSequence& seq, double sigma, Rng& rng);

/// Applies one view recipe in the fixed order RSS, RSF, RGO, RFC, RSC, normalization, noise.
TokenSequence make_view(const TokenSequence& base, const ViewRecipe& recipe, const AugmentPolicy& policy,
                        const Normalization& norm, Rng& rng);

/// V = 2 + N_s views: two global views then N_s local views.
std::vector<TokenSequence> make_views(const ChannelMatrix& channel, const AugmentPolicy& policy,
                                      const Normalization& norm, Rng& rng);
std::vector<TokenSequence> make_views(const TokenSequence& base, const AugmentPolicy& policy,
                                      const Normalization& norm, Rng& rng);

}  // namespace swit
