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

#include "coba/imaging.hpp"

#include <algorithm>
#include <cmath>

#include "coba/errors.hpp"
#include "fft.hpp"

namespace coba {

namespace {
const double kMinus6dB = std::pow(10.0, -6.0 / 20.0);
}

std::vector<double> envelope(std::span<const double> line) {
  const std::size_t n = line.size();
  if (n == 0) return {};
  detail::ComplexFft fft(n);
  auto* z = fft.data();
  for (std::size_t i = 0; i < n; ++i) z[i] = {line[i], 0.0};
  fft.forward();
  // Keep DC (and Nyquist for even n), double positive bins, drop negative ones.
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (k < half || (k == half && n % 2 == 1)) {
      z[k] *= 2.0;
    } else if (k > half) {
      z[k] = 0.0;
    }
  }
  fft.inverse();
  std::vector<double> env(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(z[i]) * scale;
  return env;
}

Matrix log_compress(const Matrix& intensity, double dynamic_range_db) {
  if (!(dynamic_range_db > 0.0)) throw InvalidArgument("dynamic range must be positive");
  const auto data = intensity.data();
  double peak = 0.0;
  for (double v : data) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("intensities must be finite and >= 0");
    peak = std::max(peak, v);
  }
  if (!(peak > 0.0)) throw NumericalError("cannot log-compress an all-zero image");
  Matrix out(intensity.rows(), intensity.cols());
  auto dst = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double db = data[i] > 0.0 ? 20.0 * std::log10(data[i] / peak) : -dynamic_range_db;
    dst[i] = std::clamp(db, -dynamic_range_db, 0.0);
  }
  return out;
}

BModeImage make_bmode(const BeamformedLines& lines, double speed_of_sound,
                      double dynamic_range_db) {
  const std::size_t n_lines = lines.rf.rows();
  const std::size_t n_depth = lines.rf.cols();
  BModeImage img;
  img.intensity = Matrix(n_depth, n_lines);
  img.line_angles = lines.angles;
  img.dynamic_range_db = dynamic_range_db;
  img.depth_axis.resize(n_depth);
  for (std::size_t j = 0; j < n_depth; ++j) {
    img.depth_axis[j] = 0.5 * speed_of_sound * (lines.t0 + static_cast<double>(j) / lines.fs);
  }
  for (std::size_t i = 0; i < n_lines; ++i) {
    const auto env = envelope(lines.rf.row(i));
    for (std::size_t j = 0; j < n_depth; ++j) img.intensity(j, i) = env[j];
  }
  img.log_image = log_compress(img.intensity, dynamic_range_db);
  return img;
}

double contrast_ratio(const BModeImage& img, const Region& cyst, const Region& background) {
  if (!(cyst.radius > 0.0) || !(background.radius > 0.0)) {
    throw InvalidArgument("contrast regions need a positive radius");
  }
  double sum_c = 0.0;
  double sum_b = 0.0;
  std::size_t n_c = 0;
  std::size_t n_b = 0;
  auto inside = [](const Region& g, double x, double z) {
    const double dx = x - g.x;
    const double dz = z - g.z;
    return dx * dx + dz * dz <= g.radius * g.radius;
  };
  for (std::size_t i = 0; i < img.line_angles.size(); ++i) {
    const double s = std::sin(img.line_angles[i]);
    const double c = std::cos(img.line_angles[i]);
    for (std::size_t j = 0; j < img.depth_axis.size(); ++j) {
      const double x = img.depth_axis[j] * s;
      const double z = img.depth_axis[j] * c;
      if (inside(cyst, x, z)) {
        sum_c += img.intensity(j, i);
        ++n_c;
      }
      if (inside(background, x, z)) {
        sum_b += img.intensity(j, i);
        ++n_b;
      }
    }
  }
  if (n_c == 0 || n_b == 0) throw InvalidArgument("contrast region holds no image pixels");
  const double mu_c = sum_c / static_cast<double>(n_c);
  const double mu_b = sum_b / static_cast<double>(n_b);
  if (!(mu_b > 0.0)) throw NumericalError("background region has zero mean intensity");
  return 20.0 * std::log10(mu_c / mu_b);
}

std::pair<Region, Region> default_cr_regions(double cyst_x, double cyst_z, double cyst_radius,
                                             double offset) {
  const Region inner{cyst_x, cyst_z, 0.5 * cyst_radius};
  const Region bck{cyst_x + offset, cyst_z, 0.5 * cyst_radius};
  return {inner, bck};
}

std::vector<double> lateral_cross_section(const BModeImage& img, double depth) {
  const auto& axis = img.depth_axis;
  if (axis.empty()) throw InvalidArgument("image has no depth samples");
  if (depth < axis.front() || depth > axis.back()) throw InvalidArgument("depth outside the image");
  auto it = std::min_element(axis.begin(), axis.end(), [depth](double a, double b) {
    return std::abs(a - depth) < std::abs(b - depth);
  });
  const auto row = static_cast<std::size_t>(it - axis.begin());
  const auto r = img.intensity.row(row);
  return {r.begin(), r.end()};
}

double fwhm_around(std::span<const double> section, std::size_t peak) {
  const std::size_t n = section.size();
  if (peak >= n) throw InvalidArgument("peak index outside the section");
  const double level = kMinus6dB * section[peak];
  if (!(section[peak] > 0.0)) throw NotFound("section peak is not positive");

  std::size_t r = peak;
  while (r + 1 < n && section[r] >= level) ++r;
  std::size_t l = peak;
  while (l > 0 && section[l] >= level) --l;
  if (section[r] >= level || section[l] >= level) {
    throw NotFound("-6 dB width runs off the end of the section");
  }
  auto crossing = [&](std::size_t in, std::size_t out) {
    const double t = (section[in] - level) / (section[in] - section[out]);
    return static_cast<double>(in) + t * (static_cast<double>(out) - static_cast<double>(in));
  };
  return crossing(r - 1, r) - crossing(l + 1, l);
}

double fwhm_from_section(std::span<const double> section) {
  if (section.empty()) throw InvalidArgument("empty section");
  const auto peak = static_cast<std::size_t>(std::max_element(section.begin(), section.end()) -
                                             section.begin());
  return fwhm_around(section, peak);
}

PointResolution point_resolution(const BModeImage& img, double x, double z, double search_m) {
  const std::size_t n_lines = img.line_angles.size();
  const std::size_t n_depth = img.depth_axis.size();
  if (n_lines < 3 || n_depth < 3) throw InvalidArgument("image too small for a width measurement");
  PointResolution out;
  double best = -1.0;
  for (std::size_t i = 0; i < n_lines; ++i) {
    const double s = std::sin(img.line_angles[i]);
    const double c = std::cos(img.line_angles[i]);
    for (std::size_t j = 0; j < n_depth; ++j) {
      const double dx = img.depth_axis[j] * s - x;
      const double dz = img.depth_axis[j] * c - z;
      if (dx * dx + dz * dz > search_m * search_m) continue;
      if (img.intensity(j, i) > best) {
        best = img.intensity(j, i);
        out.peak_line = i;
        out.peak_sample = j;
      }
    }
  }
  if (!(best > 0.0)) throw NotFound("no reflector inside the search disc");

  std::vector<double> lateral(n_lines);
  for (std::size_t i = 0; i < n_lines; ++i) lateral[i] = img.intensity(out.peak_sample, i);
  const double dtheta = (img.line_angles.back() - img.line_angles.front()) /
                        static_cast<double>(n_lines - 1);
  out.lateral_m = fwhm_around(lateral, out.peak_line) * std::abs(dtheta) *
                  img.depth_axis[out.peak_sample];

  std::vector<double> axial(n_depth);
  for (std::size_t j = 0; j < n_depth; ++j) axial[j] = img.intensity(j, out.peak_line);
  const double dz = (img.depth_axis.back() - img.depth_axis.front()) /
                    static_cast<double>(n_depth - 1);
  out.axial_m = fwhm_around(axial, out.peak_sample) * dz;
  return out;
}

}  // namespace coba
