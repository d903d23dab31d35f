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

#include "coba/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "coba/errors.hpp"

namespace coba {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double pulse_value(const PulseSpec& spec, double t) {
  const double T = spec.duration();
  if (t < 0.0 || t > T) return 0.0;
  const double window = 0.5 - 0.5 * std::cos(kTwoPi * t / T);
  return window * std::sin(kTwoPi * spec.center_frequency * t);
}

std::vector<double> synth_pulse(const PulseSpec& spec) {
  if (spec.cycles < 1) throw InvalidArgument("pulse needs at least one cycle");
  if (!(spec.center_frequency > 0.0 && spec.fs > 0.0)) {
    throw InvalidArgument("pulse frequencies must be positive");
  }
  const auto count = static_cast<std::size_t>(std::floor(spec.duration() * spec.fs)) + 1;
  std::vector<double> p(count);
  for (std::size_t k = 0; k < count; ++k) p[k] = pulse_value(spec, static_cast<double>(k) / spec.fs);
  return p;
}

Scatterer scatterer_at(double x, double z, double amplitude) {
  return {std::hypot(x, z), std::atan2(x, z), amplitude};
}

SimulationResult generate_channel_data(const ImagingConfig& config, const Phantom& phantom,
                                       const PulseSpec& pulse, const SimulationOptions& options,
                                       unsigned threads) {
  config.validate();
  if (pulse.cycles < 1) throw InvalidArgument("pulse needs at least one cycle");
  const PositionSet elements = options.elements ? *options.elements
                                                : make_ula(config.element_half_count);
  if (elements.empty()) throw InvalidArgument("no receive elements");

  const bool windowed = config.depth_max > 0.0;
  SimulationResult result;
  std::vector<Scatterer> kept;
  for (const auto& s : phantom.scatterers) {
    if (!std::isfinite(s.r) || !std::isfinite(s.theta) || !std::isfinite(s.amplitude)) {
      throw InvalidArgument("scatterer with non-finite parameters");
    }
    if (!(s.r > 0.0) || (windowed && (s.r < config.depth_min || s.r > config.depth_max))) {
      ++result.skipped;
      continue;
    }
    kept.push_back(s);
  }

  const double c = config.speed_of_sound;
  const double fs = config.sampling_frequency;
  const double T = pulse.duration();
  const double reach = std::max(std::abs(elements.min()), std::abs(elements.max())) * config.pitch;

  double r_lo = windowed ? config.depth_min : 0.0;
  double r_hi = windowed ? config.depth_max : 0.0;
  if (!windowed && !kept.empty()) {
    auto [lo, hi] = std::minmax_element(kept.begin(), kept.end(),
                                        [](const Scatterer& a, const Scatterer& b) { return a.r < b.r; });
    r_lo = lo->r;
    r_hi = hi->r;
  }
  const double t0 = std::max(0.0, (2.0 * r_lo - reach) / c);
  const double t_end = (2.0 * r_hi + reach) / c + T;
  const auto count = static_cast<std::size_t>(std::ceil(std::max(0.0, t_end - t0) * fs)) + 1;

  ChannelData& data = result.data;
  data.samples = Matrix(elements.size(), count);
  data.element_positions = elements.with_pitch(config.pitch);
  data.t0 = t0;
  data.config = config;

  auto synth_row = [&](std::size_t row) {
    const double x = elements.positions()[row] * config.pitch;
    auto dst = data.samples.row(row);
    for (const auto& s : kept) {
      const double rx = std::sqrt(s.r * s.r - 2.0 * x * s.r * std::sin(s.theta) + x * x);
      const double tau = (s.r + rx) / c;
      const double amp = options.spreading ? s.amplitude / s.r : s.amplitude;
      const double first = std::ceil((tau - t0) * fs);
      const double last = std::floor((tau + T - t0) * fs);
      const auto k0 = static_cast<std::ptrdiff_t>(std::max(first, 0.0));
      const auto k1 = static_cast<std::ptrdiff_t>(std::min(last, static_cast<double>(count - 1)));
      for (std::ptrdiff_t k = k0; k <= k1; ++k) {
        const double t = t0 + static_cast<double>(k) / fs;
        dst[static_cast<std::size_t>(k)] += amp * pulse_value(pulse, t - tau);
      }
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(elements.size())));
  if (threads == 1) {
    for (std::size_t r = 0; r < elements.size(); ++r) synth_row(r);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) {
      pool.emplace_back([&, k] {
        for (std::size_t r = k; r < elements.size(); r += threads) synth_row(r);
      });
    }
  }
  return result;
}

NormalStream::NormalStream(std::uint64_t seed) : engine_(seed) {}

double NormalStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  spare_ = radius * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return radius * std::cos(kTwoPi * u2);
}

Phantom make_cyst_phantom(const ImagingConfig& config, const CystSpec& cyst, double margin_rad) {
  if (!(cyst.radius > 0.0)) throw InvalidArgument("cyst radius must be positive");
  if (!(cyst.density_per_mm2 >= 0.0)) throw InvalidArgument("scatterer density must be >= 0");
  if (!(config.depth_max > 0.0 && config.depth_min < config.depth_max)) {
    throw InvalidArgument("cyst phantom needs a depth window");
  }
  if (config.scan_angles.empty()) throw InvalidArgument("cyst phantom needs scan angles");

  const auto [amin, amax] = std::minmax_element(config.scan_angles.begin(), config.scan_angles.end());
  const double th_lo = *amin - margin_rad;
  const double th_hi = *amax + margin_rad;
  const double r_lo = config.depth_min;
  const double r_hi = config.depth_max;
  const double area_mm2 = 0.5 * (th_hi - th_lo) * (r_hi * r_hi - r_lo * r_lo) * 1e6;
  const auto count = static_cast<std::size_t>(std::llround(cyst.density_per_mm2 * area_mm2));

  Phantom ph;
  ph.seed = cyst.seed;
  NormalStream rng(cyst.seed);
  for (std::size_t k = 0; k < count; ++k) {
    const double r = std::sqrt(r_lo * r_lo + rng.uniform() * (r_hi * r_hi - r_lo * r_lo));
    const double th = th_lo + rng.uniform() * (th_hi - th_lo);
    const double amp = rng.normal();
    const double dx = r * std::sin(th) - cyst.center_x;
    const double dz = r * std::cos(th) - cyst.center_z;
    if (dx * dx + dz * dz <= cyst.radius * cyst.radius) continue;
    ph.scatterers.push_back({r, th, amp});
  }
  return ph;
}

}  // namespace coba
