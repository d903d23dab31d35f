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

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "coba/geometry.hpp"

namespace coba {

/// Uniform samples of sin(theta) over [-1, 1], both ends included.
struct AngularGrid {
  std::vector<double> sin_theta;

  static constexpr std::size_t kDefaultCount = 4096;
  static AngularGrid uniform(std::size_t count = kDefaultCount);

  std::size_t size() const { return sin_theta.size(); }
  double step() const;
};

/// Far-field response with the steering direction fixed at broadside.
struct BeamPattern {
  AngularGrid grid;
  std::vector<std::complex<double>> values;
  double wavelength_m = 1.0;
  double pitch_m = 0.5;

  std::vector<double> magnitude() const;
  double peak() const;
};

/// H(theta) = sum_n w_n exp(-j 2 pi (d / lambda) n sin(theta)) over the given
/// positions. With a sum co-array and its intrinsic (or modified) weights this
/// is the pattern of the matching convolutional beamformer.
BeamPattern bp_weighted(const PositionSet& positions, const ApodizationVector& weights,
                        const AngularGrid& grid, double wavelength, double pitch);

/// Pattern of a convolutional beamformer that applies co-array weights w~ to
/// the products of element pairs: H = sum_{i,j in J} w~_{i+j} e^{-jk(i+j)}.
/// Evaluated by summing over all ordered element pairs.
BeamPattern bp_pairwise(const PositionSet& elements, const ApodizationVector& coarray_weights,
                        const AngularGrid& grid, double wavelength, double pitch);

/// Smallest positive sin(theta) of a pattern zero.
///
/// Walks outward from broadside to the first local minimum of |H|^2 and
/// refines it with a parabola through the three neighbouring samples. The
/// minimum counts as a zero when the refined power is at most 1e-6 of the
/// peak power. Throws NotFound otherwise (e.g. a single element).
double first_zero(const BeamPattern& bp);

struct LobeMetrics {
  double fwhm_sin_theta = 0.0;
  double psl_db = 0.0;
};

/// Main-lobe width at -6 dB and peak side-lobe level. Throws NotFound when
/// the main lobe reaches the grid edge.
LobeMetrics lobe_metrics(const BeamPattern& bp);

/// CSV with header sin_theta,magnitude_db,real,imag; magnitudes normalised to
/// a 0 dB peak.
void write_beampattern_csv(std::ostream& os, const BeamPattern& bp);

}  // namespace coba
