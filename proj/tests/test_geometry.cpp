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
#include <map>
#include <random>
#include <set>

#include "coba/design_oracle.hpp"
#include "coba/errors.hpp"
#include "coba/geometry.hpp"

using namespace coba;

namespace {

std::vector<int> as_vec(const PositionSet& p) { return {p.begin(), p.end()}; }

// Ordered-pair counts by direct enumeration.
std::map<int, long> pair_counts(const PositionSet& J) {
  std::map<int, long> m;
  for (int i : J)
    for (int j : J) ++m[i + j];
  return m;
}

}  // namespace

TEST_CASE("position sets are sorted and duplicate free") {
  PositionSet p({3, -1, 3, 0, -1});
  CHECK(as_vec(p) == std::vector<int>{-1, 0, 3});
  CHECK(p.min() == -1);
  CHECK(p.max() == 3);
  CHECK(p.contains(0));
  CHECK_FALSE(p.contains(1));
  CHECK(p.index_of(3) == 2);
  CHECK(p.index_of(2) == -1);
  CHECK(PositionSet({0, 3}).is_subset_of(p));
  CHECK_FALSE(PositionSet({0, 4}).is_subset_of(p));
  CHECK_THROWS_AS(PositionSet().min(), InvalidArgument);
}

TEST_CASE("make_ula") {
  CHECK(as_vec(make_ula(1)) == std::vector<int>{0});
  CHECK(as_vec(make_ula(3)) == std::vector<int>{-2, -1, 0, 1, 2});
  const auto u9 = make_ula(9);
  CHECK(u9.size() == 17);
  CHECK(u9.min() == -8);
  CHECK(u9.max() == 8);
  CHECK_THROWS_AS(make_ula(0), InvalidArgument);
}

TEST_CASE("sumset examples") {
  const auto one = sumset(PositionSet({0}));
  CHECK(as_vec(one.sumset) == std::vector<int>{0});
  CHECK(one.multiplicity.at(0) == 1);

  const auto three = sumset(PositionSet({-1, 0, 1}));
  CHECK(as_vec(three.sumset) == std::vector<int>{-2, -1, 0, 1, 2});
  CHECK(three.multiplicity.offset == -2);
  CHECK(three.multiplicity.values == std::vector<double>{1, 2, 3, 2, 1});

  const PositionSet U({-6, -3, -2, -1, 0, 1, 2, 3, 6});
  std::vector<int> expect;
  for (const auto& [n, c] : pair_counts(U)) expect.push_back(n);
  const auto co = sumset(U);
  CHECK(as_vec(co.sumset) == expect);
  std::vector<int> literal{-12, -9};
  for (int n = -8; n <= 8; ++n) literal.push_back(n);
  literal.push_back(9);
  literal.push_back(12);
  CHECK(expect == literal);

  CHECK_THROWS_AS(sumset(PositionSet()), InvalidArgument);
}

TEST_CASE("sumset invariants on random sets") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> v;
    const int m = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < m; ++k) v.push_back(static_cast<int>(rng() % 41) - 20);
    const PositionSet J(v);
    const auto co = sumset(J);
    const auto counts = pair_counts(J);
    CHECK(co.multiplicity.first() == 2 * J.min());
    CHECK(co.multiplicity.last() == 2 * J.max());
    double total = 0.0;
    for (int n = co.multiplicity.first(); n <= co.multiplicity.last(); ++n) {
      const double got = co.multiplicity.at(n);
      const auto it = counts.find(n);
      CHECK(got == (it == counts.end() ? 0.0 : static_cast<double>(it->second)));
      CHECK((got >= 1.0) == co.sumset.contains(n));
      total += got;
    }
    CHECK(total == static_cast<double>(J.size() * J.size()));
    CHECK(intrinsic_apodization(J) == co.multiplicity);
  }
}

TEST_CASE("intrinsic apodization") {
  const auto a = intrinsic_apodization(PositionSet({0, 2}));
  CHECK(a.offset == 0);
  CHECK(a.values == std::vector<double>{1, 0, 2, 0, 1});

  for (int N : {2, 5, 9, 33}) {
    const auto t = intrinsic_apodization(make_ula(N));
    for (int n = -2 * (N - 1); n <= 2 * (N - 1); ++n) {
      CHECK(t.at(n) == static_cast<double>((2 * N - 1) - std::abs(n)));
    }
  }

  const auto sym = intrinsic_apodization(build_scoba(12, 3, 4).elements);
  for (int n = sym.first(); n <= sym.last(); ++n) CHECK(sym.at(n) == sym.at(-n));
  CHECK_THROWS_AS(intrinsic_apodization(PositionSet()), InvalidArgument);
}

TEST_CASE("linear_convolve matches the schoolbook product") {
  const std::vector<std::int64_t> a{1, -2, 3};
  const std::vector<std::int64_t> b{4, 0, -1, 5};
  // (1 - 2x + 3x^2)(4 - x^2 + 5x^3) expanded by hand.
  CHECK(linear_convolve(a, b) == std::vector<std::int64_t>{4, -8, 11, 7, -13, 15});
}

TEST_CASE("is_sparse_array") {
  const auto I = make_ula(9);
  CHECK_FALSE(is_sparse_array(I, I));
  CHECK(is_sparse_array(build_scoba(9, 3, 3).elements, I));
  CHECK_FALSE(is_sparse_array(PositionSet({0}), PositionSet({-1, 0, 1})));
}

TEST_CASE("build_scoba") {
  const auto d9 = build_scoba(9, 3, 3);
  CHECK(as_vec(d9.elements) == std::vector<int>{-6, -3, -2, -1, 0, 1, 2, 3, 6});
  CHECK(d9.element_count == 9);
  CHECK(as_vec(build_scoba(4, 2, 2).elements) == std::vector<int>{-2, -1, 0, 1, 2});
  CHECK(build_scoba(4, 2, 2).element_count == 2 * 2 + 2 * 2 - 3);
  CHECK(build_scoba(64, 8, 8).element_count == 29);
  CHECK_THROWS_AS(build_scoba(9, 2, 3), InvalidArgument);

  for (int N = 2; N <= 60; ++N) {
    for (int A : divisors(N)) {
      const auto d = build_scoba(N, A, N / A);
      CHECK(make_ula(N).is_subset_of(d.coarray.sumset));
      if (A > 1 && N / A > 1) CHECK(d.element_count == scoba_element_count(A, N / A));
    }
  }
}

TEST_CASE("build_scobar") {
  const auto d9 = build_scobar(9, 3, 3);
  CHECK(d9.element_count == 13);
  CHECK(as_vec(d9.elements) ==
        std::vector<int>{-8, -7, -6, -3, -2, -1, 0, 1, 2, 3, 6, 7, 8});
  CHECK(build_scobar(64, 8, 8).element_count == 43);
  CHECK_THROWS_AS(build_scobar(64, 4, 8), InvalidArgument);
  CHECK_THROWS_AS(build_scobar(9, 9, 1), InvalidArgument);

  for (int N = 2; N <= 60; ++N) {
    for (int A : divisors(N)) {
      const int B = N / A;
      if (B <= 1) continue;
      const auto d = build_scobar(N, A, B);
      CHECK(d.coarray.sumset == sumset(make_ula(N)).sumset);
      if (A > 1) CHECK(d.element_count == scobar_element_count(A, B));
    }
  }
}

TEST_CASE("reference designs of the phantom experiments") {
  CHECK(build_scoba(32, 4, 8).element_count == 21);
  CHECK(build_scobar(32, 4, 8).element_count == 27);
}

TEST_CASE("optimize_scoba") {
  CHECK(optimize_scoba(16).canonical() == FactorPair{4, 4});
  CHECK(optimize_scoba(12).canonical() == FactorPair{3, 4});
  const auto p7 = optimize_scoba(7);
  CHECK(p7.degenerate);
  CHECK(p7.canonical() == FactorPair{1, 7});
  CHECK(build_scoba(7, 1, 7).element_count == 13);
  CHECK_THROWS_AS(optimize_scoba(1), InvalidArgument);
}

TEST_CASE("optimize_scobar") {
  const auto o8 = optimize_scobar(8);
  CHECK(o8.canonical() == FactorPair{2, 4});
  CHECK(build_scobar(8, 2, 4).element_count == 11);

  const auto o64 = optimize_scobar(64);
  CHECK(o64.canonical() == FactorPair{8, 8});
  CHECK(std::find(o64.solutions.begin(), o64.solutions.end(), FactorPair{4, 16}) !=
        o64.solutions.end());
  CHECK(build_scobar(64, 4, 16).element_count == 43);

  CHECK(optimize_scobar(6).canonical() == FactorPair{2, 3});
  CHECK(build_scobar(6, 2, 3).element_count == 9);
  CHECK(optimize_scobar(7).degenerate);
  CHECK_THROWS_AS(optimize_scobar(1), InvalidArgument);
}

TEST_CASE("minimize_aperture") {
  CHECK(minimize_aperture(12) == FactorPair{6, 2});
  CHECK(scoba_aperture_span(6, 2) == 12);
  CHECK(minimize_aperture(9) == FactorPair{3, 3});
  CHECK(minimize_aperture(10) == FactorPair{5, 2});
  CHECK_THROWS_AS(minimize_aperture(13), NoNontrivialDivisor);
}

TEST_CASE("brute-force oracle") {
  const auto a = brute_force_design_optimum(16, Variant::scoba, Objective::element_count);
  CHECK(a.pair == FactorPair{4, 4});
  CHECK(a.value == 13);
  const auto b = brute_force_design_optimum(8, Variant::scobar, Objective::element_count);
  CHECK(b.pair == FactorPair{2, 4});
  CHECK(b.value == 11);
  const auto c = brute_force_design_optimum(12, Variant::scoba, Objective::aperture);
  CHECK(c.pair == FactorPair{6, 2});
  CHECK(c.value == 12);
}

TEST_CASE("closed forms agree with enumeration for N in [2, 200]") {
  for (int N = 2; N <= 200; ++N) {
    CAPTURE(N);
    const auto bs = brute_force_design_optimum(N, Variant::scoba, Objective::element_count);
    for (const auto& p : optimize_scoba(N).solutions) CHECK(build_scoba(N, p.A, p.B).element_count == bs.value);
    const auto br = brute_force_design_optimum(N, Variant::scobar, Objective::element_count);
    for (const auto& p : optimize_scobar(N).solutions) CHECK(build_scobar(N, p.A, p.B).element_count == br.value);
    if (!is_prime(N)) {
      const auto ba = brute_force_design_optimum(N, Variant::scoba, Objective::aperture);
      const auto p = minimize_aperture(N);
      CHECK(scoba_aperture_span(p.A, p.B) == ba.value);
    }
  }
}

TEST_CASE("canonical tie-breaks") {
  for (int N = 4; N <= 200; ++N) {
    const auto s = optimize_scoba(N).canonical();
    CHECK(s.A <= s.B);
  }
}

TEST_CASE("variant names round-trip") {
  CHECK(variant_from_string(to_string(Variant::scoba)) == Variant::scoba);
  CHECK(variant_from_string(to_string(Variant::scobar)) == Variant::scobar);
  CHECK_THROWS_AS(variant_from_string("dense"), InvalidArgument);
}

TEST_CASE("divisors and primes") {
  CHECK(divisors(12) == std::vector<int>{1, 2, 3, 4, 6, 12});
  CHECK(is_prime(2));
  CHECK(is_prime(97));
  CHECK_FALSE(is_prime(1));
  CHECK_FALSE(is_prime(91));
}
