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

#include "coba/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <thread>

#include "coba/errors.hpp"
#include "fft.hpp"

namespace coba {

void ImagingConfig::validate() const {
  if (!(speed_of_sound > 0.0)) throw InvalidArgument("speed of sound must be positive");
  if (!(center_frequency > 0.0)) throw InvalidArgument("center frequency must be positive");
  if (!(sampling_frequency > 4.0 * center_frequency)) {
    throw InvalidArgument("sampling frequency must exceed 4 f0 to carry the 2 f0 harmonic");
  }
  if (!(pitch > 0.0)) throw InvalidArgument("pitch must be positive");
  if (element_half_count < 2) throw InvalidArgument("element half-count N must be >= 2");
  if (scan_angles.empty()) throw InvalidArgument("no scan angles");
  for (double a : scan_angles) {
    if (!std::isfinite(a) || std::abs(a) >= std::numbers::pi / 2) {
      throw InvalidArgument("scan angles must lie inside (-pi/2, pi/2)");
    }
  }
  if (depth_max > 0.0 && !(depth_min >= 0.0 && depth_min < depth_max)) {
    throw InvalidArgument("depth range must satisfy 0 <= min < max");
  }
  if (!(dynamic_range_db > 0.0)) throw InvalidArgument("dynamic range must be positive");
}

std::span<const double> ChannelData::trace(int position) const {
  const auto k = element_positions.index_of(position);
  if (k < 0) throw InvalidArgument("no channel for element " + std::to_string(position));
  return samples.row(static_cast<std::size_t>(k));
}

ChannelData ChannelData::select(const PositionSet& positions) const {
  ChannelData out;
  out.samples = Matrix(positions.size(), sample_count());
  std::size_t r = 0;
  for (int p : positions) {
    const auto src = trace(p);
    std::copy(src.begin(), src.end(), out.samples.row(r++).begin());
  }
  out.element_positions = positions.with_pitch(element_positions.pitch_m());
  out.t0 = t0;
  out.config = config;
  return out;
}

void ChannelData::validate() const {
  if (samples.rows() != element_positions.size()) {
    throw InvalidArgument("channel rows do not match the element count");
  }
  for (double v : samples.data()) {
    if (!std::isfinite(v)) throw InvalidArgument("channel data holds non-finite samples");
  }
}

FilterSpec FilterSpec::harmonic_bandpass(double center_frequency, int taps) {
  FilterSpec f;
  f.kind = FilterKind::bandpass;
  f.low_hz = 1.5 * center_frequency;
  f.high_hz = 2.5 * center_frequency;
  f.taps = taps;
  return f;
}

FilterSpec FilterSpec::highpass(double cutoff_hz, int taps) {
  FilterSpec f;
  f.kind = FilterKind::highpass;
  f.cutoff_hz = cutoff_hz;
  f.taps = taps;
  return f;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::das: return "das";
    case Method::coba: return "coba";
    case Method::scoba: return "scoba";
    case Method::scobar: return "scobar";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  if (s == "das") return Method::das;
  if (s == "coba") return Method::coba;
  if (s == "scoba") return Method::scoba;
  if (s == "scobar") return Method::scobar;
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

std::string_view to_string(Apodization a) {
  switch (a) {
    case Apodization::unity: return "unity";
    case Apodization::das_match: return "das_match";
    case Apodization::triangle: return "triangle";
  }
  return "?";
}

Apodization apodization_from_string(std::string_view s) {
  if (s == "unity") return Apodization::unity;
  if (s == "das_match" || s == "das-match") return Apodization::das_match;
  if (s == "triangle") return Apodization::triangle;
  throw InvalidArgument("unknown apodization '" + std::string(s) + "'");
}

bool is_sparse(Method m) { return m == Method::scoba || m == Method::scobar; }

double compute_delays(const ImagingConfig& config, int element_index, double r, double theta) {
  if (!(r > 0.0)) throw InvalidArgument("focal range must be positive");
  const double x = element_index * config.pitch;
  const double rx = std::sqrt(r * r - 2.0 * x * r * std::sin(theta) + x * x);
  return (r + rx) / config.speed_of_sound;
}

ChannelData apply_dynamic_delays(const ChannelData& data, double scan_angle, double out_t0,
                                 std::size_t out_count) {
  const auto& cfg = data.config;
  const double fs = cfg.sampling_frequency;
  const double c = cfg.speed_of_sound;
  const double sin_a = std::sin(scan_angle);
  const std::size_t n_in = data.sample_count();

  ChannelData out;
  out.samples = Matrix(data.samples.rows(), out_count);
  out.element_positions = data.element_positions;
  out.t0 = out_t0;
  out.config = cfg;

  std::size_t row = 0;
  for (int n : data.element_positions) {
    const auto in = data.samples.row(row);
    auto dst = out.samples.row(row);
    const double x = n * cfg.pitch;
    for (std::size_t j = 0; j < out_count; ++j) {
      const double t = out_t0 + static_cast<double>(j) / fs;
      const double r = 0.5 * c * t;
      if (!(r > 0.0)) continue;
      const double tau = (r + std::sqrt(r * r - 2.0 * x * r * sin_a + x * x)) / c;
      const double pos = (tau - data.t0) * fs;
      const double base = std::floor(pos);
      if (base < -1.0 || base >= static_cast<double>(n_in)) continue;
      const auto i0 = static_cast<std::ptrdiff_t>(base);
      const double frac = pos - base;
      const double y0 = i0 >= 0 ? in[static_cast<std::size_t>(i0)] : 0.0;
      const double y1 = i0 + 1 < static_cast<std::ptrdiff_t>(n_in)
                            ? in[static_cast<std::size_t>(i0 + 1)]
                            : 0.0;
      dst[j] = (1.0 - frac) * y0 + frac * y1;
    }
    ++row;
  }
  return out;
}

ChannelData apply_dynamic_delays(const ChannelData& data, double scan_angle) {
  return apply_dynamic_delays(data, scan_angle, data.t0, data.sample_count());
}

Matrix u_transform(const Matrix& y) {
  Matrix u(y.rows(), y.cols());
  auto src = y.data();
  auto dst = u.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = std::copysign(std::sqrt(std::abs(src[i])), src[i]);
  }
  return u;
}

ApertureSignals u_transform(const ChannelData& delayed) {
  return {u_transform(delayed.samples), delayed.element_positions};
}

namespace {

void check_rows(const Matrix& u, const PositionSet& positions) {
  if (positions.empty()) throw InvalidArgument("co-array convolution of an empty array");
  if (u.rows() != positions.size()) {
    throw InvalidArgument("aperture signal rows (" + std::to_string(u.rows()) +
                          ") do not match the element count (" +
                          std::to_string(positions.size()) + ")");
  }
}

// Row of each sumset position, indexed by position - 2 min.
std::vector<std::ptrdiff_t> sum_row_lookup(const SumCoArray& co) {
  std::vector<std::ptrdiff_t> lookup(co.multiplicity.size(), -1);
  std::ptrdiff_t r = 0;
  for (int p : co.sumset) lookup[static_cast<std::size_t>(p - co.multiplicity.offset)] = r++;
  return lookup;
}

}  // namespace

CoArraySignals coarray_convolve_direct(const Matrix& u, const PositionSet& positions) {
  check_rows(u, positions);
  CoArraySignals out{Matrix(), sumset(positions)};
  const std::size_t m = positions.size();
  const std::size_t T = u.cols();
  const std::size_t rows = out.coarray.sumset.size();
  out.s = Matrix(rows, T);

  const auto lookup = sum_row_lookup(out.coarray);
  const auto pos = positions.positions();
  const int base = out.coarray.multiplicity.offset;
  std::vector<std::size_t> pair_row(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      pair_row[i * m + j] = static_cast<std::size_t>(lookup[static_cast<std::size_t>(pos[i] + pos[j] - base)]);
    }
  }

  std::vector<double> column(m);
  std::vector<double> acc(rows);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < m; ++i) column[i] = u(i, t);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double ui = column[i];
      const std::size_t* rowp = &pair_row[i * m];
      for (std::size_t j = 0; j < m; ++j) acc[rowp[j]] += ui * column[j];
    }
    for (std::size_t r = 0; r < rows; ++r) out.s(r, t) = acc[r];
  }
  return out;
}

CoArraySignals coarray_convolve_fft(const Matrix& u, const PositionSet& positions) {
  check_rows(u, positions);
  CoArraySignals out{Matrix(), sumset(positions)};
  const std::size_t m = positions.size();
  const std::size_t T = u.cols();
  const std::size_t rows = out.coarray.sumset.size();
  out.s = Matrix(rows, T);

  const int lo = positions.min();
  const auto span = static_cast<std::size_t>(positions.max() - lo + 1);
  const std::size_t n = detail::next_pow2(2 * span - 1);
  constexpr std::size_t kBlock = 256;
  const std::size_t batch = std::min(kBlock, std::max<std::size_t>(T, 1));
  detail::BatchedRealFft fft(n, batch);

  std::vector<std::size_t> offset(m);
  for (std::size_t i = 0; i < m; ++i) offset[i] = static_cast<std::size_t>(positions.positions()[i] - lo);
  std::vector<std::size_t> read_at(rows);
  {
    std::size_t r = 0;
    for (int p : out.coarray.sumset) read_at[r++] = static_cast<std::size_t>(p - 2 * lo);
  }
  const double scale = 1.0 / static_cast<double>(n);
  const std::size_t bins = fft.bins();

  for (std::size_t t0 = 0; t0 < T; t0 += batch) {
    const std::size_t count = std::min(batch, T - t0);
    double* x = fft.real();
    std::fill(x, x + n * batch, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const auto row = u.row(i);
      for (std::size_t b = 0; b < count; ++b) x[b * n + offset[i]] = row[t0 + b];
    }
    fft.forward();
    std::complex<double>* X = fft.spectrum();
    for (std::size_t k = 0; k < bins * batch; ++k) X[k] *= X[k];
    fft.inverse();
    for (std::size_t r = 0; r < rows; ++r) {
      auto dst = out.s.row(r);
      for (std::size_t b = 0; b < count; ++b) dst[t0 + b] = x[b * n + read_at[r]] * scale;
    }
  }
  return out;
}

CoArraySignals coarray_convolve(const Matrix& u, const PositionSet& positions,
                                ConvolutionPath path) {
  if (path == ConvolutionPath::automatic) {
    path = positions.size() > 24 ? ConvolutionPath::fft : ConvolutionPath::direct;
  }
  return path == ConvolutionPath::fft ? coarray_convolve_fft(u, positions)
                                      : coarray_convolve_direct(u, positions);
}

ApodizationVector modified_weights(const ApodizationVector& desired,
                                   const ApodizationVector& intrinsic) {
  for (int n = desired.first(); n <= desired.last(); ++n) {
    if (desired.at(n) != 0.0 && intrinsic.at(n) == 0.0) {
      throw UnreachablePosition("desired weight at co-array position " + std::to_string(n) +
                                " has no element pair");
    }
  }
  ApodizationVector out{intrinsic.offset, std::vector<double>(intrinsic.size(), 0.0)};
  for (int n = intrinsic.first(); n <= intrinsic.last(); ++n) {
    const double a = intrinsic.at(n);
    if (a != 0.0) out.values[static_cast<std::size_t>(n - out.offset)] = desired.at(n) / a;
  }
  return out;
}

std::vector<double> weighted_coarray_sum(const CoArraySignals& s, const ApodizationVector& weights) {
  if (s.s.rows() != s.coarray.sumset.size()) {
    throw InvalidArgument("co-array signal rows do not match the sumset");
  }
  std::vector<double> y(s.s.cols(), 0.0);
  std::size_t r = 0;
  for (int p : s.coarray.sumset) {
    if (!weights.covers(p)) {
      throw InvalidArgument("weights do not cover co-array position " + std::to_string(p));
    }
    const double w = weights.at(p);
    const auto row = s.s.row(r++);
    if (w == 0.0) continue;
    for (std::size_t t = 0; t < y.size(); ++t) y[t] += w * row[t];
  }
  return y;
}

std::vector<double> design_filter(const FilterSpec& spec, double fs) {
  if (spec.taps < 3 || spec.taps % 2 == 0) {
    throw InvalidArgument("filter length must be odd and >= 3 for a linear-phase design");
  }
  if (!(fs > 0.0)) throw InvalidArgument("sampling frequency must be positive");
  const double nyquist = 0.5 * fs;
  if (spec.kind == FilterKind::bandpass) {
    if (!(spec.low_hz > 0.0 && spec.low_hz < spec.high_hz && spec.high_hz < nyquist)) {
      throw InvalidArgument("band-pass edges must satisfy 0 < low < high < fs/2");
    }
  } else if (!(spec.cutoff_hz > 0.0 && spec.cutoff_hz < nyquist)) {
    throw InvalidArgument("high-pass cutoff must lie in (0, fs/2)");
  }

  auto lowpass = [fs](double fc, double m) {
    const double w = 2.0 * fc / fs;
    if (m == 0.0) return w;
    const double x = std::numbers::pi * w * m;
    return w * std::sin(x) / x;
  };

  const int M = spec.taps;
  const double mid = 0.5 * (M - 1);
  std::vector<double> h(static_cast<std::size_t>(M));
  for (int k = 0; k < M; ++k) {
    const double m = k - mid;
    const double ideal = spec.kind == FilterKind::bandpass
                             ? lowpass(spec.high_hz, m) - lowpass(spec.low_hz, m)
                             : (m == 0.0 ? 1.0 : 0.0) - lowpass(spec.cutoff_hz, m);
    const double window = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * k / (M - 1));
    h[static_cast<std::size_t>(k)] = ideal * window;
  }
  return h;
}

std::vector<double> apply_filter(std::span<const double> taps, std::span<const double> x) {
  const auto M = static_cast<std::ptrdiff_t>(taps.size());
  const std::ptrdiff_t delay = (M - 1) / 2;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    // y[i] = sum_k h[k] x[i + delay - k]
    const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, i + delay - (n - 1));
    const std::ptrdiff_t k_hi = std::min<std::ptrdiff_t>(M - 1, i + delay);
    double acc = 0.0;
    for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) acc += taps[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(i + delay - k)];
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

double filter_gain(std::span<const double> taps, double frequency_hz, double fs) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = 0; k < taps.size(); ++k) {
    acc += taps[k] * std::polar(1.0, -2.0 * std::numbers::pi * frequency_hz * static_cast<double>(k) / fs);
  }
  return std::abs(acc);
}

ApodizationVector desired_weights(Method method, int N, const std::optional<SparseDesign>& design,
                                  Apodization apodization) {
  if (N < 1) throw InvalidArgument("N must be >= 1");
  if (method == Method::das) {
    if (apodization == Apodization::triangle) {
      throw InvalidArgument("triangle apodization applies to the co-array methods only");
    }
    return ApodizationVector::constant(-(N - 1), N - 1, 1.0);
  }

  const int full = 2 * (N - 1);
  SumCoArray co;
  if (method == Method::coba) {
    co = sumset(make_ula(N));
  } else {
    if (!design) throw InvalidArgument("sparse method requires a design");
    co = design->coarray;
  }

  ApodizationVector w{co.multiplicity.offset, std::vector<double>(co.multiplicity.size(), 0.0)};
  for (int n = w.first(); n <= w.last(); ++n) {
    double v = 0.0;
    switch (apodization) {
      case Apodization::unity: v = co.sumset.contains(n) ? 1.0 : 0.0; break;
      case Apodization::das_match: v = std::abs(n) <= N - 1 ? 1.0 : 0.0; break;
      case Apodization::triangle: v = std::abs(n) <= full ? (2.0 * N - 1.0) - std::abs(n) : 0.0; break;
    }
    w.values[static_cast<std::size_t>(n - w.offset)] = v;
  }
  if (apodization == Apodization::triangle) {
    // The triangle spans [-2(N-1), 2(N-1)]; widen when the co-array is narrower.
    if (w.first() > -full || w.last() < full) {
      ApodizationVector wide{-full, {}};
      for (int n = -full; n <= full; ++n) wide.values.push_back((2.0 * N - 1.0) - std::abs(n));
      return wide;
    }
  }
  return w;
}

BeamformerSetup make_setup(Method method, int N, const std::optional<SparseDesign>& design,
                           Apodization apodization, const FilterSpec& filter, double fs,
                           ConvolutionPath path) {
  BeamformerSetup s;
  s.method = method;
  s.N = N;
  s.path = path;
  if (is_sparse(method)) {
    if (!design) throw InvalidArgument("sparse method requires a design");
    const Variant want = method == Method::scoba ? Variant::scoba : Variant::scobar;
    if (design->variant != want) throw InvalidArgument("design variant does not match the method");
    if (design->N != N) throw InvalidArgument("design N does not match the array");
    s.design = design;
    s.receive_elements = design->elements;
  } else {
    s.receive_elements = make_ula(N);
  }
  s.desired = desired_weights(method, N, design, apodization);
  if (method != Method::das) {
    s.coarray = sumset(s.receive_elements);
    s.coarray_weights = modified_weights(s.desired, intrinsic_apodization(s.receive_elements));
    s.filter_taps = design_filter(filter, fs);
  }
  return s;
}

std::pair<double, std::size_t> output_window(const ChannelData& data) {
  const auto& cfg = data.config;
  if (cfg.depth_max <= 0.0) return {data.t0, data.sample_count()};
  const double fs = cfg.sampling_frequency;
  const double t_start = 2.0 * cfg.depth_min / cfg.speed_of_sound;
  const double t_end = 2.0 * cfg.depth_max / cfg.speed_of_sound;
  const auto count = static_cast<std::size_t>(std::floor((t_end - t_start) * fs)) + 1;
  return {t_start, count};
}

std::vector<double> beamform_line(const ChannelData& data, const BeamformerSetup& setup,
                                  double scan_angle) {
  // Only the rows of the receive aperture are touched from here on.
  const ChannelData rx = data.select(setup.receive_elements);
  const auto [t0, count] = output_window(data);
  const ChannelData delayed = apply_dynamic_delays(rx, scan_angle, t0, count);

  if (setup.method == Method::das) {
    std::vector<double> y(count, 0.0);
    std::size_t r = 0;
    for (int n : delayed.element_positions) {
      const double w = setup.desired.at(n);
      const auto row = delayed.samples.row(r++);
      for (std::size_t t = 0; t < count; ++t) y[t] += w * row[t];
    }
    return y;
  }

  const Matrix u = u_transform(delayed.samples);
  const CoArraySignals s = coarray_convolve(u, delayed.element_positions, setup.path);
  const std::vector<double> ybar = weighted_coarray_sum(s, setup.coarray_weights);
  return apply_filter(setup.filter_taps, ybar);
}

std::vector<double> beamform_line(const ChannelData& data, Method method,
                                  const std::optional<SparseDesign>& design,
                                  Apodization apodization, const FilterSpec& filter,
                                  double scan_angle) {
  const auto setup = make_setup(method, data.config.element_half_count, design, apodization,
                                filter, data.config.sampling_frequency);
  return beamform_line(data, setup, scan_angle);
}

BeamformedLines beamform_image(const ChannelData& data, const BeamformerSetup& setup,
                               unsigned threads) {
  const auto& angles = data.config.scan_angles;
  const auto [t0, count] = output_window(data);
  BeamformedLines out{Matrix(angles.size(), count), angles, t0, data.config.sampling_frequency};

  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < angles.size(); i += stride) {
      const auto line = beamform_line(data, setup, angles[i]);
      std::copy(line.begin(), line.end(), out.rf.row(i).begin());
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(angles.size())));
  if (threads == 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned k = 0; k < threads; ++k) {
    pool.emplace_back([&, k] {
      try {
        work(k, threads);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace coba
