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

#include "swit/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "swit/error.hpp"
#include "swit/parallel.hpp"

namespace swit {
namespace {

constexpr double kPi = std::numbers::pi;

bool finite(const Vec3& v) { return v.allFinite(); }

void require_finite_angles(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidArgument("steering vector: non-finite angle");
}

ComplexVector phase_progression(double step, int count) {
  ComplexVector out(count);
  for (int m = 0; m < count; ++m) out[m] = std::polar(1.0, step * m);
  return out;
}

}  // namespace

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgument("scenario: " + what); };
  if (num_users < 1) fail("num_users must be >= 1");
  if (num_scatterers < 0) fail("num_scatterers must be >= 0");
  if (num_subcarriers < 2) fail("num_subcarriers must be >= 2");
  if (array_rows < 1 || array_cols < 1) fail("array dimensions must be >= 1");
  if (rrh_positions.empty()) fail("at least one RRH is required");
  if (!(subcarrier_spacing > 0.0) || !std::isfinite(subcarrier_spacing)) fail("subcarrier_spacing must be > 0");
  if (!(carrier_freq > 0.0) || !std::isfinite(carrier_freq)) fail("carrier_freq must be > 0");
  if (element_spacing < 0.0 || !std::isfinite(element_spacing)) fail("element_spacing must be >= 0");
  if (snapshots < 1) fail("snapshots must be >= 1");
  if (scatterer_jitter_var < 0.0 || user_jitter_var < 0.0) fail("jitter variances must be >= 0");
  if (spot_rows < 1 || spot_cols < 1) fail("spot grid must be at least 1x1");
  if (!finite(region.lo) || !finite(region.hi)) fail("region bounds must be finite");
  if ((region.hi - region.lo).minCoeff() < 0.0) fail("region bounds inverted");
  if (region.hi.x() <= region.lo.x() || region.hi.y() <= region.lo.y()) fail("region is empty in x/y");
  for (const auto& b : rrh_positions)
    if (!finite(b)) fail("RRH positions must be finite");
  const double users = static_cast<double>(num_users) * snapshots;
  if (users > std::numeric_limits<std::uint32_t>::max()) fail("sample count overflows u32");
}

ArrayGeometry ArrayGeometry::from(const ScenarioConfig& config) {
  return ArrayGeometry{config.array_rows, config.array_cols, config.spacing(), config.wavelength(),
                       config.subcarrier_spacing};
}

ComplexVector steering_vector_x(double azimuth, double elevation, int cols, double spacing, double wavelength) {
  require_finite_angles(azimuth, elevation);
  if (cols < 1 || !(wavelength > 0.0)) throw InvalidArgument("steering_vector_x: need cols >= 1 and wavelength > 0");
  const double step = 2.0 * kPi / wavelength * spacing * std::sin(elevation) * std::sin(azimuth);
  return phase_progression(step, cols);
}

ComplexVector steering_vector_z(double elevation, int rows, double spacing, double wavelength) {
  require_finite_angles(elevation, 0.0);
  if (rows < 1 || !(wavelength > 0.0)) throw InvalidArgument("steering_vector_z: need rows >= 1 and wavelength > 0");
  const double step = 2.0 * kPi / wavelength * spacing * std::cos(elevation);
  return phase_progression(step, rows);
}

ComplexVector array_response(double azimuth, double elevation, const ArrayGeometry& geometry) {
  if (geometry.rows < 1 || geometry.cols < 1) throw InvalidArgument("array_response: empty array");
  if (static_cast<long long>(geometry.rows) * geometry.cols > std::numeric_limits<int>::max())
    throw InvalidArgument("array_response: dimension overflow");
  const ComplexVector ax = steering_vector_x(azimuth, elevation, geometry.cols, geometry.spacing, geometry.wavelength);
  const ComplexVector az = steering_vector_z(elevation, geometry.rows, geometry.spacing, geometry.wavelength);
  ComplexVector out(geometry.rows * geometry.cols);
  for (int z = 0; z < geometry.rows; ++z)
    for (int x = 0; x < geometry.cols; ++x) out[z * geometry.cols + x] = az[z] * ax[x];
  return out;
}

PathParams path_params(const Vec3& user, const Vec3& rrh, const Vec3& scatterer, double carrier_freq, bool los,
                       double phase) {
  const double wavelength = kSpeedOfLight / carrier_freq;
  double length = 0.0;
  Vec3 arrival;  // from the array towards the last interaction point
  if (los) {
    length = (user - rrh).norm();
    if (length == 0.0) throw DegenerateGeometry("path_params: user coincides with RRH");
    arrival = user - rrh;
  } else {
    const double first = (user - scatterer).norm();
    const double second = (scatterer - rrh).norm();
    if (first == 0.0 || second == 0.0) throw DegenerateGeometry("path_params: scatterer coincides with an endpoint");
    length = first + second;
    arrival = scatterer - rrh;
  }
  PathParams p;
  p.delay = length / kSpeedOfLight;
  const double r = arrival.norm();
  p.elevation = std::acos(std::clamp(arrival.z() / r, -1.0, 1.0));
  p.azimuth = std::atan2(arrival.x(), arrival.y());
  if (p.azimuth == -kPi) p.azimuth = kPi;
  // |eta| = lambda / (4 pi c tau): free-space amplitude over the total path length.
  p.gain = std::polar(wavelength / (4.0 * kPi * kSpeedOfLight * p.delay), phase);
  return p;
}

ComplexVector channel_vector(int subcarrier, std::span<const PathParams> paths, const ArrayGeometry& geometry) {
  if (geometry.rows < 1 || geometry.cols < 1) throw InvalidArgument("channel_vector: empty array geometry");
  ComplexVector h = ComplexVector::Zero(geometry.rows * geometry.cols);
  for (const auto& p : paths) {
    const std::complex<double> rotation =
        p.gain * std::polar(1.0, 2.0 * kPi * subcarrier * geometry.subcarrier_spacing * p.delay);
    h += rotation * array_response(p.azimuth, p.elevation, geometry);
  }
  return h;
}

PerturbedPositions apply_uncertainty(std::span<const Vec3> scatterers, const Vec3& user, double scatterer_var,
                                     double user_var, Rng& rng) {
  const double s_sd = std::sqrt(scatterer_var);
  const double u_sd = std::sqrt(user_var);
  PerturbedPositions out;
  out.scatterers.reserve(scatterers.size());
  for (const auto& p : scatterers) {
    Vec3 q = p;
    for (int i = 0; i < 3; ++i) q[i] += s_sd > 0.0 ? rng.normal(0.0, s_sd) : 0.0;
    out.scatterers.push_back(q);
  }
  out.user = user;
  for (int i = 0; i < 3; ++i) out.user[i] += u_sd > 0.0 ? rng.normal(0.0, u_sd) : 0.0;
  return out;
}

ComplexVector add_estimation_noise(const ComplexVector& h, double snr_db, Rng& rng, std::optional<double> signal_power) {
  if (std::isinf(snr_db) && snr_db > 0.0) return h;
  if (std::isnan(snr_db)) throw InvalidArgument("add_estimation_noise: SNR is NaN");
  const double power = signal_power.value_or(h.size() > 0 ? h.squaredNorm() / static_cast<double>(h.size()) : 0.0);
  const double noise_var = power / std::pow(10.0, snr_db / 10.0);
  const double sd = std::sqrt(noise_var / 2.0);
  ComplexVector out = h;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += std::complex<double>(rng.normal(0.0, sd), rng.normal(0.0, sd));
  return out;
}

std::uint32_t spot_label(const Vec3& position, const ScenarioConfig& config) {
  auto cell = [](double v, double lo, double hi, int n) {
    const double t = (v - lo) / (hi - lo);
    return std::clamp(static_cast<int>(std::floor(t * n)), 0, n - 1);
  };
  const int col = cell(position.x(), config.region.lo.x(), config.region.hi.x(), config.spot_cols);
  const int row = cell(position.y(), config.region.lo.y(), config.region.hi.y(), config.spot_rows);
  return static_cast<std::uint32_t>(row * config.spot_cols + col);
}

namespace {

Vec3 uniform_in(const Box3& box, Rng& rng) {
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = box.lo[i] == box.hi[i] ? box.lo[i] : rng.uniform(box.lo[i], box.hi[i]);
  return v;
}

}  // namespace

std::vector<Vec3> nominal_scatterers(const ScenarioConfig& config) {
  Rng rng = Rng(config.seed).derive("scatterers");
  std::vector<Vec3> out;
  out.reserve(config.num_scatterers);
  for (int g = 0; g < config.num_scatterers; ++g) out.push_back(uniform_in(config.region, rng));
  return out;
}

Normalization compute_normalization(std::span<const ChannelSample> samples) {
  Normalization n{0.0, 0.0, 0.0};
  for (const auto& s : samples) {
    n.re = std::max(n.re, static_cast<double>(s.channel.real().cwiseAbs().maxCoeff()));
    n.im = std::max(n.im, static_cast<double>(s.channel.imag().cwiseAbs().maxCoeff()));
    n.abs = std::max(n.abs, static_cast<double>(s.channel.cwiseAbs().maxCoeff()));
  }
  // An all-zero part would make the constant zero; fall back to 1 so normalization stays an identity there.
  if (n.re == 0.0) n.re = 1.0;
  if (n.im == 0.0) n.im = 1.0;
  if (n.abs == 0.0) n.abs = 1.0;
  return n;
}

Dataset generate_dataset(const ScenarioConfig& config) {
  config.validate();
  const Rng root(config.seed);
  const ArrayGeometry geometry = ArrayGeometry::from(config);
  const std::vector<Vec3> scatterers = nominal_scatterers(config);
  const int per_rrh = config.antennas_per_rrh();
  const int num_rrh = static_cast<int>(config.rrh_positions.size());
  const int paths_per_rrh = config.num_scatterers + (config.los_enabled ? 1 : 0);

  // Scatterer phases are fixed per scatterer and snapshot; the last slot is the LOS phase.
  std::vector<std::vector<double>> phases(config.snapshots);
  for (int t = 0; t < config.snapshots; ++t) {
    Rng rng = root.derive("phase").derive(static_cast<std::uint64_t>(t));
    phases[t].resize(config.num_scatterers + 1);
    for (auto& p : phases[t]) p = rng.uniform(-kPi, kPi);
  }

  Dataset ds;
  ds.num_antennas = config.num_antennas();
  ds.num_subcarriers = config.num_subcarriers;
  ds.spot_count = config.spot_count();
  ds.config = config;
  const std::size_t total = static_cast<std::size_t>(config.num_users) * config.snapshots;
  ds.samples.resize(total);

  parallel_for(total, [&](std::size_t index) {
    const int r = static_cast<int>(index / config.snapshots);
    const int t = static_cast<int>(index % config.snapshots);
    Rng user_rng = root.derive("user").derive(static_cast<std::uint64_t>(r));
    const Vec3 nominal = uniform_in(config.region, user_rng);
    Rng rng = root.derive("sample").derive(static_cast<std::uint64_t>(index));
    const PerturbedPositions pos =
        apply_uncertainty(scatterers, nominal, config.scatterer_jitter_var, config.user_jitter_var, rng);

    Eigen::MatrixXcd clean(ds.num_antennas, config.num_subcarriers);
    std::vector<PathParams> paths;
    paths.reserve(paths_per_rrh);
    for (int m = 0; m < num_rrh; ++m) {
      const Vec3& b = config.rrh_positions[m];
      paths.clear();
      for (int g = 0; g < config.num_scatterers; ++g)
        paths.push_back(path_params(pos.user, b, pos.scatterers[g], config.carrier_freq, false, phases[t][g]));
      if (config.los_enabled)
        paths.push_back(path_params(pos.user, b, b, config.carrier_freq, true, phases[t][config.num_scatterers]));
      for (int n = 0; n < config.num_subcarriers; ++n)
        clean.block(m * per_rrh, n, per_rrh, 1) = channel_vector(n, paths, geometry);
    }

    Eigen::MatrixXcd noisy = clean;
    if (!config.noiseless) {
      const double power = clean.squaredNorm() / static_cast<double>(clean.size());
      for (int n = 0; n < config.num_subcarriers; ++n)
        noisy.col(n) = add_estimation_noise(clean.col(n), config.snr_db, rng, power);
    }

    ChannelSample& s = ds.samples[index];
    s.channel = noisy.cast<std::complex<float>>();
    s.position = {static_cast<float>(nominal.x()), static_cast<float>(nominal.y()), static_cast<float>(nominal.z())};
    s.spot_label = spot_label(nominal, config);
    s.snapshot_index = static_cast<std::uint32_t>(t);
    const double mean_power = s.channel.cast<std::complex<double>>().squaredNorm() /
                              (static_cast<double>(ds.num_antennas) * config.num_subcarriers);
    s.pathloss_db = static_cast<float>(-10.0 * std::log10(mean_power));
  });

  ds.norm = compute_normalization(ds.samples);
  return ds;
}

}  // namespace swit
