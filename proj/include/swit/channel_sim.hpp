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

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "swit/rng.hpp"

namespace swit {

inline constexpr double kSpeedOfLight = 299792458.0;

using Vec3 = Eigen::Vector3d;
using ComplexVector = Eigen::VectorXcd;
/// Stored channels are single precision so the on-disk format round-trips bit-exactly.
using ChannelMatrix = Eigen::MatrixXcf;

struct Box3 {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
};

/// Geometry, array layout, RF parameters and uncertainty model for synthetic data.
struct ScenarioConfig {
  Box3 region{Vec3(0.0, 0.0, 1.0), Vec3(20.0, 20.0, 2.0)};
  int num_users = 4096;
  int num_scatterers = 12;
  std::vector<Vec3> rrh_positions{Vec3(10.0, -1.0, 3.0)};
  int array_rows = 4;  // M_z
  int array_cols = 4;  // M_x
  double carrier_freq = 3.5e9;
  double subcarrier_spacing = 625e3;
  int num_subcarriers = 32;
  double element_spacing = 0.0;  // 0 selects half a wavelength
  double scatterer_jitter_var = 0.01;
  double user_jitter_var = 0.0025;
  int snapshots = 1;
  double snr_db = 20.0;
  bool noiseless = false;
  bool los_enabled = true;
  int spot_rows = 2;
  int spot_cols = 2;
  std::uint64_t seed = 1;

  double wavelength() const { return kSpeedOfLight / carrier_freq; }
  double spacing() const { return element_spacing > 0.0 ? element_spacing : 0.5 * wavelength(); }
  int antennas_per_rrh() const { return array_rows * array_cols; }
  int num_antennas() const { return antennas_per_rrh() * static_cast<int>(rrh_positions.size()); }
  int spot_count() const { return spot_rows * spot_cols; }

  /// Throws InvalidArgument describing the first violated invariant.
  void validate() const;
};

/// One propagation path as seen by one array.
struct PathParams {
  std::complex<double> gain;
  double delay = 0.0;      // seconds
  double azimuth = 0.0;    // (-pi, pi], measured from broadside (+y) towards +x
  double elevation = 0.0;  // [0, pi], measured from +z
};

/// Uniform planar array of one RRH: elements along x (cols) and z (rows).
struct ArrayGeometry {
  int rows = 1;  // M_z
  int cols = 1;  // M_x
  double spacing = 0.0;
  double wavelength = 0.0;
  double subcarrier_spacing = 0.0;

  static ArrayGeometry from(const ScenarioConfig& config);
};

struct ChannelSample {
  ChannelMatrix channel;  // N_r x N_c'
  std::array<float, 3> position{};
  std::uint32_t spot_label = 0;
  float pathloss_db = 0.0f;
  std::uint32_t snapshot_index = 0;  // generation metadata, not persisted
};

/// Dataset-wide maxima of |Re|, |Im| and |h|.
struct Normalization {
  double re = 1.0;
  double im = 1.0;
  double abs = 1.0;
};

struct Dataset {
  std::vector<ChannelSample> samples;
  int num_antennas = 0;
  int num_subcarriers = 0;
  int spot_count = 0;
  Normalization norm;
  std::optional<ScenarioConfig> config;

  std::size_t size() const { return samples.size(); }
};

ComplexVector steering_vector_x(double azimuth, double elevation, int cols, double spacing, double wavelength);
ComplexVector steering_vector_z(double elevation, int rows, double spacing, double wavelength);

/// a = a_z(el) kron a_x(az, el); z-major ordering.
ComplexVector array_response(double azimuth, double elevation, const ArrayGeometry& geometry);

/// Maps a path's geometry to delay, arrival angles and free-space gain with the given phase.
/// `scatterer` is ignored for LOS paths.
PathParams path_params(const Vec3& user, const Vec3& rrh, const Vec3& scatterer, double carrier_freq, bool los,
                       double phase = 0.0);

/// h_n = sum_g eta_g exp(j 2 pi n df tau_g) a(az_g, el_g) for zero-based subcarrier n.
ComplexVector channel_vector(int subcarrier, std::span<const PathParams> paths, const ArrayGeometry& geometry);

struct PerturbedPositions {
  std::vector<Vec3> scatterers;
  Vec3 user;
};

/// Adds i.i.d. zero-mean Gaussian jitter per coordinate to scatterers and the user.
PerturbedPositions apply_uncertainty(std::span<const Vec3> scatterers, const Vec3& user, double scatterer_var,
                                     double user_var, Rng& rng);

/// Adds circularly-symmetric Gaussian noise at the requested SNR. The reference
/// signal power per entry defaults to the mean power of `h`. Infinite SNR is a no-op.
ComplexVector add_estimation_noise(const ComplexVector& h, double snr_db, Rng& rng,
                                   std::optional<double> signal_power = std::nullopt);

/// Row-major index of the spot-grid cell containing (x, y); row follows y, column follows x.
std::uint32_t spot_label(const Vec3& position, const ScenarioConfig& config);

std::vector<Vec3> nominal_scatterers(const ScenarioConfig& config);

Normalization compute_normalization(std::span<const ChannelSample> samples);

/// R*T samples ordered user-major; a pure function of `config`.
Dataset generate_dataset(const ScenarioConfig& config);

}  // namespace swit
