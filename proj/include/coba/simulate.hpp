// SPDX-License-Identifier: Apache-2.0
//
// coba: convolutional and sparse convolutional beamforming for ultrasound
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
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "coba/beamform.hpp"

namespace coba {

struct PulseSpec {
  int cycles = 2;
  double center_frequency = 3.5e6;
  double fs = 100e6;
  WindowKind window = WindowKind::hanning;

  double duration() const { return cycles / center_frequency; }
};

/// p(t) = 0.5 (1 - cos(2 pi t / T)) sin(2 pi f0 t) for 0 <= t <= T, T = cycles / f0.
double pulse_value(const PulseSpec& spec, double t);

/// Samples t = k / fs for k = 0 .. floor(T fs).
std::vector<double> synth_pulse(const PulseSpec& spec);

struct Scatterer {
  double r = 0.0;      // m
  double theta = 0.0;  // rad
  double amplitude = 1.0;
};

struct Phantom {
  std::vector<Scatterer> scatterers;
  std::uint64_t seed = 0;
};

struct SimulationOptions {
  // Amplitude falls off as 1 / r.
  bool spreading = true;
  // Receive elements; defaults to the full 2N-1 element ULA.
  std::optional<PositionSet> elements;
  // Recorded for provenance only; transmit focusing is ideal.
  double tx_focus_r = 0.05;
  double tx_focus_theta = 0.0;
};

struct SimulationResult {
  ChannelData data;
  // Scatterers outside config.depth_range (when set) are dropped.
  std::size_t skipped = 0;
};

/**
 * Point-scatterer channel data.
 *
 * Every scatterer k at (r_k, theta_k) adds a_k p(t - r_k / c - tau_rx(n, k))
 * to element n, where tau_rx = sqrt(r^2 - 2 n d r sin(theta) + (n d)^2) / c is
 * the one-way return path and r_k / c is the ideally focused transmit time.
 * No element directivity, attenuation or noise. The record starts at
 * t0 = max(0, (2 r_min - (N-1) d) / c) and covers the latest echo. Rows are
 * synthesised independently; the result does not depend on thread count.
 */
SimulationResult generate_channel_data(const ImagingConfig& config, const Phantom& phantom,
                                       const PulseSpec& pulse,
                                       const SimulationOptions& options = {},
                                       unsigned threads = 1);

/// Standard normal deviates from a 64-bit Mersenne Twister via Box-Muller.
///
/// Both steps are fully specified: uniforms take the top 53 bits of a
/// mt19937_64 draw, u in [0, 1) mapped to (0, 1] for the logarithm, and each
/// pair (u1, u2) yields sqrt(-2 ln u1) cos(2 pi u2) then the matching sine.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed);
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct CystSpec {
  double center_x = 0.0;  // lateral, m
  double center_z = 0.05; // depth, m
  double radius = 4e-3;
  double density_per_mm2 = 10.0;
  std::uint64_t seed = 1;
};

/**
 * Speckle background with an anechoic disc.
 *
 * Scatterers are uniform over the annular sector spanned by the config depth
 * window and the scan angles widened by `margin_rad` on each side; those
 * inside the cyst are dropped. Amplitudes are standard normal.
 */
Phantom make_cyst_phantom(const ImagingConfig& config, const CystSpec& cyst,
                          double margin_rad = 0.05);

/// Scatterer in Cartesian coordinates (lateral x, depth z).
Scatterer scatterer_at(double x, double z, double amplitude = 1.0);

}  // namespace coba
