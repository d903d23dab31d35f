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
#include <span>
#include <vector>

#include "coba/beamform.hpp"
#include "coba/matrix.hpp"

namespace coba {

/// Envelope image on the polar (depth, angle) grid of the scan.
struct BModeImage {
  Matrix intensity;  // [depth x lines], before compression
  Matrix log_image;  // dB, in [-dynamic_range_db, 0]
  std::vector<double> line_angles;
  std::vector<double> depth_axis;
  double dynamic_range_db = 60.0;
};

/// |analytic signal| from one-sided spectrum doubling.
std::vector<double> envelope(std::span<const double> line);

/// 20 log10(I / max I), clipped to [-dynamic_range_db, 0].
Matrix log_compress(const Matrix& intensity, double dynamic_range_db);

/// Envelope detection and compression of beamformed lines. Depth of sample
/// j is c (t0 + j / fs) / 2.
BModeImage make_bmode(const BeamformedLines& lines, double speed_of_sound,
                      double dynamic_range_db);

/// Disc in (lateral x, depth z), metres.
struct Region {
  double x = 0.0;
  double z = 0.0;
  double radius = 0.0;
};

/// 20 log10(mean intensity in cyst / mean intensity in background), with
/// pixels at (r sin(theta), r cos(theta)).
double contrast_ratio(const BModeImage& img, const Region& cyst, const Region& background);

/// Inner disc of half the cyst radius, and an equal disc at the same depth
/// offset laterally by `offset`.
std::pair<Region, Region> default_cr_regions(double cyst_x, double cyst_z, double cyst_radius,
                                             double offset);

/// Intensity row nearest to `depth` across all lines.
std::vector<double> lateral_cross_section(const BModeImage& img, double depth);

/// Width at -6 dB of the section peak, in samples, linearly interpolated.
/// Throws NotFound when the peak touches either end.
double fwhm_from_section(std::span<const double> section);
/// Same, around the given peak index rather than the global maximum.
double fwhm_around(std::span<const double> section, std::size_t peak);

/// Point-spread widths of one reflector, in metres.
struct PointResolution {
  double lateral_m = 0.0;  // across lines at the peak depth, arc length r * dtheta
  double axial_m = 0.0;    // along the peak line
  std::size_t peak_line = 0;
  std::size_t peak_sample = 0;
};

/// Finds the intensity maximum within `search_m` of (x, z) and measures its
/// -6 dB widths. Lines must be uniformly spaced in angle.
PointResolution point_resolution(const BModeImage& img, double x, double z, double search_m);

}  // namespace coba
