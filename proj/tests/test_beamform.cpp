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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "coba/beamform.hpp"
#include "coba/errors.hpp"
#include "coba/geometry.hpp"
#include "coba/imaging.hpp"
#include "coba/simulate.hpp"

using namespace coba;

namespace {

constexpr double kPi = std::numbers::pi;

ImagingConfig small_config(int N = 9) {
  ImagingConfig cfg;
  cfg.element_half_count = N;
  cfg.pitch = cfg.wavelength() / 2.0;
  cfg.depth_min = 0.045;
  cfg.depth_max = 0.055;
  cfg.scan_angles = {0.0};
  return cfg;
}

ChannelData point_data(const ImagingConfig& cfg, double r, double theta) {
  Phantom ph;
  ph.scatterers.push_back({r, theta, 1.0});
  return generate_channel_data(cfg, ph, PulseSpec{}).data;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::size_t argmax_abs(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  return best;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = d(rng);
  return m;
}

const FilterSpec kFilter = FilterSpec::harmonic_bandpass(3.5e6);

}  // namespace

TEST_CASE("config validation") {
  ImagingConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.sampling_frequency = 4.0 * cfg.center_frequency;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = ImagingConfig{};
  cfg.pitch = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = ImagingConfig{};
  cfg.element_half_count = 1;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = ImagingConfig{};
  cfg.depth_min = 0.06;
  cfg.depth_max = 0.05;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = ImagingConfig{};
  cfg.scan_angles = {kPi / 2};
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("enum names round-trip") {
  for (Method m : {Method::das, Method::coba, Method::scoba, Method::scobar}) {
    CHECK(method_from_string(to_string(m)) == m);
  }
  for (Apodization a : {Apodization::unity, Apodization::das_match, Apodization::triangle}) {
    CHECK(apodization_from_string(to_string(a)) == a);
  }
  CHECK_THROWS_AS(method_from_string("mvdr"), InvalidArgument);
  CHECK(is_sparse(Method::scoba));
  CHECK_FALSE(is_sparse(Method::coba));
}

TEST_CASE("receive delays") {
  ImagingConfig cfg;
  CHECK(compute_delays(cfg, 0, 0.05, 0.3) == doctest::Approx(64.935e-6).epsilon(1e-4));
  const double d = cfg.pitch;
  const double r = 0.04;
  CHECK(compute_delays(cfg, 5, r, 0.0) ==
        doctest::Approx((r + std::sqrt(r * r + 25.0 * d * d)) / cfg.speed_of_sound));
  CHECK_THROWS_AS(compute_delays(cfg, 0, 0.0, 0.0), InvalidArgument);

  // Far field: tau_n - tau_0 -> -n d sin(theta) / c.
  const double far = 1e4 * cfg.element_half_count * d;
  const double theta = 0.4;
  for (int n : {-20, 7, 32}) {
    const double diff = compute_delays(cfg, n, far, theta) - compute_delays(cfg, 0, far, theta);
    const double limit = -n * d * std::sin(theta) / cfg.speed_of_sound;
    CHECK(std::abs(diff - limit) <= 0.01 * std::abs(limit));
  }
}

TEST_CASE("dynamic delays") {
  const auto cfg = small_config();
  SUBCASE("zero in, zero out") {
    ChannelData z;
    z.config = cfg;
    z.element_positions = make_ula(cfg.element_half_count);
    z.samples = Matrix(z.element_positions.size(), 500);
    z.t0 = 5e-5;
    const auto out = apply_dynamic_delays(z, 0.1);
    for (double v : out.samples.data()) CHECK(v == 0.0);
  }
  SUBCASE("centre element maps time onto itself") {
    ChannelData one;
    one.config = cfg;
    one.element_positions = PositionSet({0});
    one.samples = Matrix(1, 400);
    std::mt19937_64 rng(1);
    one.samples = random_matrix(1, 400, rng);
    one.t0 = 5e-5;
    const auto out = apply_dynamic_delays(one, 0.2);
    for (std::size_t j = 0; j + 1 < 400; ++j) CHECK(out.samples(0, j) == doctest::Approx(one.samples(0, j)).epsilon(1e-6));
  }
  SUBCASE("a point scatterer lines up on every element") {
    const double theta = 5.0 * kPi / 180.0;
    auto data = point_data(cfg, 0.05, theta);
    const auto [t0, count] = output_window(data);
    const auto out = apply_dynamic_delays(data, theta, t0, count);
    const std::size_t ref = argmax_abs(out.samples.row(0));
    for (std::size_t r = 0; r < out.samples.rows(); ++r) {
      const auto k = static_cast<long>(argmax_abs(out.samples.row(r)));
      CHECK(std::abs(k - static_cast<long>(ref)) <= 1);
    }
  }
}

TEST_CASE("u-transform") {
  Matrix y(1, 4);
  y(0, 0) = 4.0;
  y(0, 1) = -9.0;
  y(0, 2) = 0.0;
  y(0, 3) = 2.25;
  const auto u = u_transform(y);
  CHECK(u(0, 0) == 2.0);
  CHECK(u(0, 1) == -3.0);
  CHECK(u(0, 2) == 0.0);
  CHECK(u(0, 3) == 1.5);

  std::mt19937_64 rng(4);
  const auto big = random_matrix(3, 100, rng);
  const auto ub = u_transform(big);
  for (std::size_t r = 0; r < 3; ++r) {
    double my = 0.0;
    double mu = 0.0;
    for (std::size_t t = 0; t < 100; ++t) {
      my = std::max(my, std::abs(big(r, t)));
      mu = std::max(mu, ub(r, t) * ub(r, t));
    }
    CHECK(mu == doctest::Approx(my).epsilon(1e-14));
  }
}

TEST_CASE("co-array convolution examples") {
  for (auto path : {ConvolutionPath::direct, ConvolutionPath::fft}) {
    CAPTURE(static_cast<int>(path));
    Matrix one(1, 1);
    one(0, 0) = 3.0;
    const auto s1 = coarray_convolve(one, PositionSet({4}), path);
    CHECK(s1.coarray.sumset == PositionSet({8}));
    CHECK(s1.s(0, 0) == doctest::Approx(9.0));

    Matrix two(2, 1);
    two(0, 0) = 2.0;
    two(1, 0) = -5.0;
    const auto s2 = coarray_convolve(two, PositionSet({0, 1}), path);
    CHECK(s2.s(0, 0) == doctest::Approx(4.0));
    CHECK(s2.s(1, 0) == doctest::Approx(-20.0));
    CHECK(s2.s(2, 0) == doctest::Approx(25.0));

    const auto ula = make_ula(7);
    const auto s3 = coarray_convolve(Matrix(ula.size(), 3, 1.0), ula, path);
    std::size_t r = 0;
    for (int n : s3.coarray.sumset) {
      for (std::size_t t = 0; t < 3; ++t) CHECK(s3.s(r, t) == doctest::Approx(13.0 - std::abs(n)));
      ++r;
    }

    const auto s4 = coarray_convolve(Matrix(ula.size(), 5, 0.0), ula, path);
    for (double v : s4.s.data()) CHECK(v == 0.0);
  }
  CHECK_THROWS_AS(coarray_convolve_direct(Matrix(3, 2), make_ula(3)), InvalidArgument);
  CHECK_THROWS_AS(coarray_convolve_fft(Matrix(2, 2), PositionSet()), InvalidArgument);
}

TEST_CASE("FFT path matches direct path") {
  std::mt19937_64 rng(8);
  for (int m : {2, 3, 8, 17, 40, 64}) {
    std::vector<int> pos;
    for (int k = 0; k < 3 * m; ++k) pos.push_back(k - m);
    std::shuffle(pos.begin(), pos.end(), rng);
    pos.resize(static_cast<std::size_t>(m));
    const PositionSet P(pos);
    // 300 samples crosses a block boundary.
    const auto u = random_matrix(P.size(), 300, rng);
    const auto d = coarray_convolve_direct(u, P);
    const auto f = coarray_convolve_fft(u, P);
    CHECK(d.coarray.sumset == f.coarray.sumset);
    double scale = 0.0;
    double err = 0.0;
    for (std::size_t i = 0; i < d.s.data().size(); ++i) {
      scale = std::max(scale, std::abs(d.s.data()[i]));
      err = std::max(err, std::abs(d.s.data()[i] - f.s.data()[i]));
    }
    CHECK(err <= 1e-9 * scale);
  }
}

TEST_CASE("modified weights") {
  const auto ula = make_ula(5);
  const auto a = intrinsic_apodization(ula);
  const auto same = modified_weights(a, a);
  for (double v : same.values) CHECK(v == 1.0);

  const auto flat = modified_weights(ApodizationVector::constant(-8, 8, 1.0), a);
  for (int n = -8; n <= 8; ++n) CHECK(flat.at(n) == doctest::Approx(1.0 / (9 - std::abs(n))));

  const auto d = build_scoba(9, 3, 3);
  const auto ad = intrinsic_apodization(d.elements);
  const auto w = modified_weights(desired_weights(Method::scoba, 9, d, Apodization::das_match), ad);
  for (int n = ad.first(); n <= ad.last(); ++n) {
    const double eff = w.at(n) * ad.at(n);
    CHECK(eff == doctest::Approx(std::abs(n) <= 8 ? 1.0 : 0.0));
  }

  CHECK_THROWS_AS(modified_weights(ApodizationVector::constant(-12, 12, 1.0), ad),
                  UnreachablePosition);
  CHECK_THROWS_AS(desired_weights(Method::das, 5, std::nullopt, Apodization::triangle),
                  InvalidArgument);
  CHECK_THROWS_AS(make_setup(Method::scoba, 9, d, Apodization::triangle, kFilter, 100e6),
                  UnreachablePosition);
}

TEST_CASE("weighted co-array sum") {
  const auto ula = make_ula(4);
  const auto s = coarray_convolve_direct(Matrix(ula.size(), 4, 1.0), ula);
  const auto zero = weighted_coarray_sum(s, ApodizationVector::constant(-6, 6, 0.0));
  for (double v : zero) CHECK(v == 0.0);

  const auto w = modified_weights(ApodizationVector::constant(-6, 6, 1.0), intrinsic_apodization(ula));
  for (double v : weighted_coarray_sum(s, w)) CHECK(v == doctest::Approx(13.0));

  Matrix one(1, 3);
  one(0, 0) = 1.0;
  one(0, 1) = -2.0;
  one(0, 2) = 0.5;
  const auto s1 = coarray_convolve_direct(one, PositionSet({3}));
  const auto y = weighted_coarray_sum(s1, ApodizationVector::constant(6, 6, 2.0));
  CHECK(y == std::vector<double>{2.0, 8.0, 0.5});

  CHECK_THROWS_AS(weighted_coarray_sum(s, ApodizationVector::constant(-5, 5, 1.0)), InvalidArgument);
}

TEST_CASE("filter design") {
  const double fs = 100e6;
  const double f0 = 3.5e6;
  const auto h = design_filter(FilterSpec::harmonic_bandpass(f0), fs);
  CHECK(h.size() == 101);
  CHECK(std::abs(20.0 * std::log10(filter_gain(h, 2.0 * f0, fs))) <= 1.0);
  CHECK(filter_gain(h, 0.0, fs) <= 1e-3);
  for (std::size_t k = 0; k < h.size(); ++k) CHECK(h[k] == doctest::Approx(h[h.size() - 1 - k]));

  const auto hp = design_filter(FilterSpec::highpass(5e6), 16e6);
  CHECK(20.0 * std::log10(filter_gain(hp, 5.5e6, 16e6)) >= -3.0);
  CHECK(20.0 * std::log10(filter_gain(hp, 3.4e6, 16e6)) <= -20.0);

  FilterSpec bad = FilterSpec::harmonic_bandpass(f0);
  bad.taps = 100;
  CHECK_THROWS_AS(design_filter(bad, fs), InvalidArgument);
  bad = FilterSpec::harmonic_bandpass(f0);
  bad.high_hz = 60e6;
  CHECK_THROWS_AS(design_filter(bad, fs), InvalidArgument);
  CHECK_THROWS_AS(design_filter(FilterSpec::highpass(0.0), fs), InvalidArgument);
}

TEST_CASE("filtering removes its own group delay") {
  const double fs = 100e6;
  const double f = 7e6;
  const auto h = design_filter(FilterSpec::harmonic_bandpass(3.5e6), fs);
  std::vector<double> x(2000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * kPi * f * static_cast<double>(i) / fs);
  const auto y = apply_filter(h, x);
  CHECK(y.size() == x.size());
  // Best alignment over +-5 sample lags, away from the edges.
  int best_lag = 0;
  double best = -1e300;
  for (int lag = -5; lag <= 5; ++lag) {
    double c = 0.0;
    for (std::size_t i = 200; i < 1800; ++i) c += x[i] * y[static_cast<std::size_t>(static_cast<long>(i) + lag)];
    if (c > best) {
      best = c;
      best_lag = lag;
    }
  }
  CHECK(std::abs(best_lag) <= 1);
}

TEST_CASE("zero channel data gives zero lines") {
  const auto cfg = small_config();
  ChannelData z;
  z.config = cfg;
  z.element_positions = make_ula(cfg.element_half_count);
  z.samples = Matrix(z.element_positions.size(), 1500);
  z.t0 = 5.5e-5;
  const auto d = build_scoba(9, 3, 3);
  const auto r = build_scobar(9, 3, 3);
  for (auto [m, design, apod] : {std::tuple{Method::das, std::optional<SparseDesign>{}, Apodization::unity},
                                 std::tuple{Method::coba, std::optional<SparseDesign>{}, Apodization::triangle},
                                 std::tuple{Method::scoba, std::optional<SparseDesign>{d}, Apodization::unity},
                                 std::tuple{Method::scobar, std::optional<SparseDesign>{r}, Apodization::triangle}}) {
    for (double v : beamform_line(z, m, design, apod, kFilter, 0.0)) CHECK(v == 0.0);
  }
}

TEST_CASE("all methods find an on-axis reflector at the same depth") {
  const auto cfg = small_config(16);
  const auto data = point_data(cfg, 0.05, 0.0);
  const auto s = build_scoba(16, 4, 4);
  const auto r = build_scobar(16, 4, 4);
  auto peak = [&](Method m, std::optional<SparseDesign> design, Apodization a) {
    return static_cast<long>(argmax(envelope(beamform_line(data, m, design, a, kFilter, 0.0))));
  };
  const long das = peak(Method::das, std::nullopt, Apodization::unity);
  CHECK(std::abs(peak(Method::coba, std::nullopt, Apodization::triangle) - das) <= 1);
  CHECK(std::abs(peak(Method::scoba, s, Apodization::das_match) - das) <= 1);
  CHECK(std::abs(peak(Method::scobar, r, Apodization::triangle) - das) <= 1);
}

TEST_CASE("amplitude scaling") {
  const auto cfg = small_config();
  auto data = point_data(cfg, 0.05, 0.02);
  const auto d = build_scoba(9, 3, 3);
  for (double alpha : {4.0, -4.0}) {
    ChannelData scaled = data;
    for (double& v : scaled.samples.data()) v *= alpha;
    const auto das = beamform_line(data, Method::das, std::nullopt, Apodization::unity, kFilter, 0.0);
    const auto das_s = beamform_line(scaled, Method::das, std::nullopt, Apodization::unity, kFilter, 0.0);
    for (std::size_t i = 0; i < das.size(); ++i) CHECK(das_s[i] == alpha * das[i]);

    for (auto [m, design] : {std::pair{Method::coba, std::optional<SparseDesign>{}},
                             std::pair{Method::scoba, std::optional<SparseDesign>{d}}}) {
      const auto a = beamform_line(data, m, design, Apodization::unity, kFilter, 0.0);
      const auto b = beamform_line(scaled, m, design, Apodization::unity, kFilter, 0.0);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == std::abs(alpha) * a[i]);
    }
  }
}

TEST_CASE("sparse methods read only the designed channels") {
  const auto cfg = small_config(16);
  const auto data = point_data(cfg, 0.05, 0.03);
  for (const auto& design : {build_scoba(16, 4, 4), build_scobar(16, 4, 4)}) {
    const Method m = design.variant == Variant::scoba ? Method::scoba : Method::scobar;
    ChannelData poisoned = data;
    ChannelData zeroed = data;
    std::size_t r = 0;
    for (int n : data.element_positions) {
      if (!design.elements.contains(n)) {
        for (double& v : poisoned.samples.row(r)) v = std::numeric_limits<double>::quiet_NaN();
        for (double& v : zeroed.samples.row(r)) v = 0.0;
      }
      ++r;
    }
    const auto a = beamform_line(poisoned, m, design, (m == Method::scobar ? Apodization::triangle : Apodization::unity), kFilter, 0.0);
    const auto b = beamform_line(zeroed, m, design, (m == Method::scobar ? Apodization::triangle : Apodization::unity), kFilter, 0.0);
    const auto c = beamform_line(data, m, design, (m == Method::scobar ? Apodization::triangle : Apodization::unity), kFilter, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::isfinite(a[i]));
      CHECK(a[i] == b[i]);
      CHECK(a[i] == c[i]);
    }

    // A channel set missing a designed element is rejected.
    const int victim = design.elements.max();
    std::vector<int> rest;
    for (int n : data.element_positions)
      if (n != victim) rest.push_back(n);
    const auto partial = data.select(PositionSet(rest));
    CHECK_THROWS_AS(beamform_line(partial, m, design, (m == Method::scobar ? Apodization::triangle : Apodization::unity), kFilter, 0.0),
                    InvalidArgument);
  }
}

TEST_CASE("COBA and SCOBAR agree on a broadside plane wave") {
  const int N = 8;
  const auto ula = make_ula(N);
  const auto v = build_scobar(N, 2, 4);
  std::vector<double> wave(400);
  for (std::size_t t = 0; t < wave.size(); ++t) {
    const double x = static_cast<double>(t) - 200.0;
    wave[t] = std::exp(-x * x / 800.0) * std::sin(2.0 * kPi * 0.035 * static_cast<double>(t));
  }
  auto run = [&](const PositionSet& elements, Method m, const std::optional<SparseDesign>& design) {
    Matrix y(elements.size(), wave.size());
    for (std::size_t r = 0; r < elements.size(); ++r) std::copy(wave.begin(), wave.end(), y.row(r).begin());
    const auto s = coarray_convolve(u_transform(y), elements);
    const auto desired = desired_weights(m, N, design, Apodization::unity);
    const auto w = modified_weights(desired, intrinsic_apodization(elements));
    return apply_filter(design_filter(kFilter, 100e6), weighted_coarray_sum(s, w));
  };
  const auto full = run(ula, Method::coba, std::nullopt);
  const auto sparse = run(v.elements, Method::scobar, v);
  double scale = 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    scale = std::max(scale, std::abs(full[i]));
    err = std::max(err, std::abs(full[i] - sparse[i]));
  }
  CHECK(scale > 0.0);
  CHECK(err <= 1e-6 * scale);
}

TEST_CASE("images do not depend on the thread count") {
  auto cfg = small_config(9);
  cfg.scan_angles = {-0.05, -0.02, 0.0, 0.01, 0.04};
  const auto data = point_data(cfg, 0.05, 0.01);
  const auto setup = make_setup(Method::coba, 9, std::nullopt, Apodization::triangle, kFilter, 100e6);
  const auto a = beamform_image(data, setup, 1);
  const auto b = beamform_image(data, setup, 3);
  CHECK(a.rf == b.rf);
  CHECK(a.angles == cfg.scan_angles);
}

TEST_CASE("setup checks the design against the method") {
  const auto s = build_scoba(9, 3, 3);
  CHECK_THROWS_AS(make_setup(Method::scobar, 9, s, Apodization::unity, kFilter, 100e6), InvalidArgument);
  CHECK_THROWS_AS(make_setup(Method::scoba, 8, s, Apodization::unity, kFilter, 100e6), InvalidArgument);
  CHECK_THROWS_AS(make_setup(Method::scoba, 9, std::nullopt, Apodization::unity, kFilter, 100e6),
                  InvalidArgument);
}
