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

#include "coba/beampattern.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "coba/errors.hpp"

namespace coba {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kZeroPowerRatio = 1e-6;
const double kMinus6dB = std::pow(10.0, -6.0 / 20.0);

void check_physics(double wavelength, double pitch) {
  if (!(wavelength > 0.0)) throw InvalidArgument("wavelength must be positive");
  if (!(pitch > 0.0)) throw InvalidArgument("pitch must be positive");
}

// exp(-j 2 pi k * cycles_per_index) for k in [lo, hi]. The product k * c is
// reduced to [-0.5, 0.5] cycles before scaling to radians.
void phasor_table(int lo, int hi, double cycles_per_index,
                  std::vector<std::complex<double>>& out) {
  out.resize(static_cast<std::size_t>(hi - lo + 1));
  for (int k = lo; k <= hi; ++k) {
    const double cycles = std::remainder(static_cast<double>(k) * cycles_per_index, 1.0);
    out[static_cast<std::size_t>(k - lo)] = std::polar(1.0, -kTwoPi * cycles);
  }
}

std::size_t broadside_index(const AngularGrid& grid) {
  const auto& s = grid.sin_theta;
  if (s.empty()) throw InvalidArgument("empty angular grid");
  auto it = std::min_element(s.begin(), s.end(),
                             [](double a, double b) { return std::abs(a) < std::abs(b); });
  return static_cast<std::size_t>(it - s.begin());
}

}  // namespace

AngularGrid AngularGrid::uniform(std::size_t count) {
  if (count < 2) throw InvalidArgument("angular grid needs at least two points");
  AngularGrid g;
  g.sin_theta.resize(count);
  const double denom = static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    g.sin_theta[i] = -1.0 + 2.0 * static_cast<double>(i) / denom;
  }
  if (count % 2 == 1) g.sin_theta[count / 2] = 0.0;
  return g;
}

double AngularGrid::step() const {
  if (sin_theta.size() < 2) return 0.0;
  return (sin_theta.back() - sin_theta.front()) / static_cast<double>(sin_theta.size() - 1);
}

std::vector<double> BeamPattern::magnitude() const {
  std::vector<double> m(values.size());
  std::transform(values.begin(), values.end(), m.begin(),
                 [](const std::complex<double>& h) { return std::abs(h); });
  return m;
}

double BeamPattern::peak() const {
  double p = 0.0;
  for (const auto& h : values) p = std::max(p, std::abs(h));
  return p;
}

BeamPattern bp_weighted(const PositionSet& positions, const ApodizationVector& weights,
                        const AngularGrid& grid, double wavelength, double pitch) {
  check_physics(wavelength, pitch);
  if (positions.empty()) throw InvalidArgument("beam pattern of an empty array");
  for (int n : positions) {
    if (!weights.covers(n)) {
      throw InvalidArgument("apodization does not cover element position " + std::to_string(n));
    }
  }

  BeamPattern bp{grid, std::vector<std::complex<double>>(grid.size()), wavelength, pitch};
  const double ratio = pitch / wavelength;
  const int lo = positions.min();
  std::vector<std::complex<double>> table;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    phasor_table(lo, positions.max(), ratio * grid.sin_theta[g], table);
    std::complex<double> acc{0.0, 0.0};
    for (int n : positions) acc += weights.at(n) * table[static_cast<std::size_t>(n - lo)];
    bp.values[g] = acc;
  }
  return bp;
}

BeamPattern bp_pairwise(const PositionSet& elements, const ApodizationVector& coarray_weights,
                        const AngularGrid& grid, double wavelength, double pitch) {
  check_physics(wavelength, pitch);
  if (elements.empty()) throw InvalidArgument("beam pattern of an empty array");

  // Weight for every ordered pair, looked up once.
  const std::size_t m = elements.size();
  std::vector<double> pair_weight(m * m);
  const auto pos = elements.positions();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) pair_weight[i * m + j] = coarray_weights.at(pos[i] + pos[j]);
  }

  BeamPattern bp{grid, std::vector<std::complex<double>>(grid.size()), wavelength, pitch};
  const double ratio = pitch / wavelength;
  const int lo = 2 * elements.min();
  std::vector<std::complex<double>> table;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    phasor_table(lo, 2 * elements.max(), ratio * grid.sin_theta[g], table);
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        acc += pair_weight[i * m + j] * table[static_cast<std::size_t>(pos[i] + pos[j] - lo)];
      }
    }
    bp.values[g] = acc;
  }
  return bp;
}

double first_zero(const BeamPattern& bp) {
  const auto& v = bp.values;
  const auto& s = bp.grid.sin_theta;
  if (v.size() != s.size() || v.size() < 3) throw InvalidArgument("malformed beam pattern");

  std::vector<double> power(v.size());
  std::transform(v.begin(), v.end(), power.begin(),
                 [](const std::complex<double>& h) { return std::norm(h); });
  const double peak_power = *std::max_element(power.begin(), power.end());
  if (!(peak_power > 0.0)) throw NotFound("beam pattern is identically zero");
  const double h = bp.grid.step();

  for (std::size_t i = broadside_index(bp.grid) + 1; i + 1 < v.size(); ++i) {
    if (s[i] <= 0.0) continue;
    if (!(power[i] <= power[i - 1] && power[i] <= power[i + 1])) continue;

    const double denom = power[i - 1] - 2.0 * power[i] + power[i + 1];
    const double delta = denom > 0.0 ? 0.5 * (power[i - 1] - power[i + 1]) / denom : 0.0;

    // Complex quadratic through the three samples, evaluated at the vertex.
    const auto& a = v[i - 1];
    const auto& b = v[i];
    const auto& c = v[i + 1];
    const std::complex<double> q =
        b + 0.5 * (c - a) * delta + 0.5 * (a - 2.0 * b + c) * delta * delta;
    if (std::norm(q) <= kZeroPowerRatio * peak_power) return s[i] + delta * h;
  }
  throw NotFound("no beam-pattern zero on the positive sin(theta) axis");
}

LobeMetrics lobe_metrics(const BeamPattern& bp) {
  const auto mag = bp.magnitude();
  const std::size_t n = mag.size();
  if (n < 3) throw InvalidArgument("malformed beam pattern");
  const std::size_t centre = broadside_index(bp.grid);
  const double peak = mag[centre];
  if (!(peak > 0.0)) throw NotFound("no main lobe at broadside");
  const double level = kMinus6dB * peak;
  const auto& s = bp.grid.sin_theta;

  std::size_t r = centre;
  while (r + 1 < n && mag[r] >= level) ++r;
  if (mag[r] >= level) throw NotFound("main lobe extends past the grid edge");
  std::size_t l = centre;
  while (l > 0 && mag[l] >= level) --l;
  if (mag[l] >= level) throw NotFound("main lobe extends past the grid edge");

  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double t = (mag[inside] - level) / (mag[inside] - mag[outside]);
    return s[inside] + t * (s[outside] - s[inside]);
  };
  LobeMetrics out;
  out.fwhm_sin_theta = crossing(r - 1, r) - crossing(l + 1, l);

  // Main lobe ends at the first local minimum on either side.
  std::size_t rn = r;
  while (rn + 1 < n && mag[rn + 1] <= mag[rn]) ++rn;
  std::size_t ln = l;
  while (ln > 0 && mag[ln - 1] <= mag[ln]) --ln;

  double side = 0.0;
  bool found = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= ln && i <= rn) continue;
    const bool left_ok = i == 0 || mag[i] >= mag[i - 1];
    const bool right_ok = i + 1 == n || mag[i] >= mag[i + 1];
    if (left_ok && right_ok) {
      side = std::max(side, mag[i]);
      found = true;
    }
  }
  out.psl_db = found && side > 0.0 ? 20.0 * std::log10(side / peak)
                                   : -std::numeric_limits<double>::infinity();
  return out;
}

void write_beampattern_csv(std::ostream& os, const BeamPattern& bp) {
  const double peak = bp.peak();
  const auto old_precision = os.precision(12);
  os << "sin_theta,magnitude_db,real,imag\n";
  for (std::size_t i = 0; i < bp.values.size(); ++i) {
    const double m = std::abs(bp.values[i]);
    const double db = (peak > 0.0 && m > 0.0) ? 20.0 * std::log10(m / peak) : -300.0;
    os << bp.grid.sin_theta[i] << ',' << std::max(db, -300.0) << ',' << bp.values[i].real() << ','
       << bp.values[i].imag() << '\n';
  }
  os.precision(old_precision);
}

}  // namespace coba
