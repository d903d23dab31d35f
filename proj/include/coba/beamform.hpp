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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "coba/geometry.hpp"
#include "coba/matrix.hpp"

namespace coba {

/// Acquisition and scan parameters. SI units throughout; angles in radians.
struct ImagingConfig {
  double speed_of_sound = 1540.0;
  double center_frequency = 3.5e6;
  double sampling_frequency = 100e6;
  double pitch = 0.22e-3;
  // N: the full array has 2N-1 elements.
  int element_half_count = 33;
  std::vector<double> scan_angles{0.0};
  // Beamformed depth window. depth_max <= 0 keeps the recorded time window.
  double depth_min = 0.0;
  double depth_max = 0.0;
  double dynamic_range_db = 60.0;

  double wavelength() const { return speed_of_sound / center_frequency; }
  // Throws InvalidArgument. The sampling rate must carry the 2 f0 harmonic.
  void validate() const;
};

/// Per-element RF traces. Row k holds the element at element_positions[k];
/// column j is sampled at t0 + j / fs.
struct ChannelData {
  Matrix samples;
  PositionSet element_positions;
  double t0 = 0.0;
  ImagingConfig config;

  std::size_t sample_count() const { return samples.cols(); }
  std::span<const double> trace(int position) const;
  // Copy holding only the requested rows; throws InvalidArgument when one is missing.
  ChannelData select(const PositionSet& positions) const;
  void validate() const;
};

/// sign(y) sqrt|y| of delayed traces, one row per element.
struct ApertureSignals {
  Matrix u;
  PositionSet positions;
};

/// Lateral self-convolution of the aperture signals: one row per sumset
/// position, s_n(t) = sum_{i + j = n} u_i(t) u_j(t).
struct CoArraySignals {
  Matrix s;
  SumCoArray coarray;
};

enum class FilterKind { bandpass, highpass };
enum class WindowKind { hanning };

struct FilterSpec {
  FilterKind kind = FilterKind::bandpass;
  double low_hz = 0.0;
  double high_hz = 0.0;
  double cutoff_hz = 0.0;
  int taps = 101;
  WindowKind window = WindowKind::hanning;

  /// Passband [1.5 f0, 2.5 f0] around the second harmonic.
  static FilterSpec harmonic_bandpass(double center_frequency, int taps = 101);
  static FilterSpec highpass(double cutoff_hz, int taps = 101);
};

enum class Method { das, coba, scoba, scobar };
enum class Apodization { unity, das_match, triangle };
enum class ConvolutionPath { automatic, direct, fft };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);
std::string_view to_string(Apodization a);
Apodization apodization_from_string(std::string_view s);
bool is_sparse(Method m);

/// Round-trip receive delay (r + sqrt(r^2 - 2 n d r sin(theta) + (n d)^2)) / c
/// for element index n and focal point (r, theta).
double compute_delays(const ImagingConfig& config, int element_index, double r, double theta);

/// Dynamic receive focusing along one scan line. Output sample j lies at
/// t = out_t0 + j / fs, i.e. depth r = c t / 2, and each trace is read at its
/// delay with linear interpolation; reads outside the record are zero.
ChannelData apply_dynamic_delays(const ChannelData& data, double scan_angle, double out_t0,
                                 std::size_t out_count);
/// Same, on the input's own time axis.
ChannelData apply_dynamic_delays(const ChannelData& data, double scan_angle);

Matrix u_transform(const Matrix& y);
ApertureSignals u_transform(const ChannelData& delayed);

/// Accumulates all |J|^2 ordered products per time sample.
CoArraySignals coarray_convolve_direct(const Matrix& u, const PositionSet& positions);
/// Per time sample: embed on the dense index range, zero-pad to the next power
/// of two >= 2 * span - 1, FFT, square, inverse FFT.
CoArraySignals coarray_convolve_fft(const Matrix& u, const PositionSet& positions);
CoArraySignals coarray_convolve(const Matrix& u, const PositionSet& positions,
                                ConvolutionPath path = ConvolutionPath::automatic);

/// w~_n = w_n / a_n on the range of the intrinsic apodization. Positions where
/// both are zero give zero; a nonzero desired weight on an unreachable
/// position throws UnreachablePosition.
ApodizationVector modified_weights(const ApodizationVector& desired,
                                   const ApodizationVector& intrinsic);

/// ybar(t) = sum_n w~_n s_n(t).
std::vector<double> weighted_coarray_sum(const CoArraySignals& s, const ApodizationVector& weights);

/// Hanning-windowed linear-phase FIR (ideal response times window).
std::vector<double> design_filter(const FilterSpec& spec, double fs);
/// Convolution with the group delay (taps - 1) / 2 removed; output has the
/// input length and zero extension at both ends.
std::vector<double> apply_filter(std::span<const double> taps, std::span<const double> x);
double filter_gain(std::span<const double> taps, double frequency_hz, double fs);

/// Everything that stays fixed across the lines of one image.
struct BeamformerSetup {
  Method method = Method::das;
  int N = 0;
  std::optional<SparseDesign> design;
  // Rows read from the channel data.
  PositionSet receive_elements;
  // DAS: weight per element. Co-array methods: desired co-array weights.
  ApodizationVector desired;
  // Co-array methods only.
  SumCoArray coarray;
  ApodizationVector coarray_weights;
  std::vector<double> filter_taps;
  ConvolutionPath path = ConvolutionPath::automatic;
};

/// Desired weights of the given kind for a method. DAS lives on the elements,
/// the co-array methods on the sum co-array.
ApodizationVector desired_weights(Method method, int N, const std::optional<SparseDesign>& design,
                                  Apodization apodization);

BeamformerSetup make_setup(Method method, int N, const std::optional<SparseDesign>& design,
                           Apodization apodization, const FilterSpec& filter, double fs,
                           ConvolutionPath path = ConvolutionPath::automatic);

/// One scan line. DAS: delay, weight, sum. Co-array methods: delay, u-transform,
/// co-array convolution, weighted sum, band-pass with group delay removed.
/// The time axis is the config depth window (or the record when unset).
std::vector<double> beamform_line(const ChannelData& data, const BeamformerSetup& setup,
                                  double scan_angle);
std::vector<double> beamform_line(const ChannelData& data, Method method,
                                  const std::optional<SparseDesign>& design,
                                  Apodization apodization, const FilterSpec& filter,
                                  double scan_angle);

struct BeamformedLines {
  // One row per scan angle.
  Matrix rf;
  std::vector<double> angles;
  double t0 = 0.0;
  double fs = 0.0;
};

/// Output time window (t0, sample count) for the config depth range.
std::pair<double, std::size_t> output_window(const ChannelData& data);

/// All scan lines of config.scan_angles. Lines are independent; threads > 1
/// splits them across workers with identical results.
BeamformedLines beamform_image(const ChannelData& data, const BeamformerSetup& setup,
                               unsigned threads = 1);

}  // namespace coba
