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

#include "coba/geometry.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>

#include "coba/errors.hpp"

namespace coba {

PositionSet::PositionSet(std::vector<int> positions, double pitch_m)
    : positions_(std::move(positions)), pitch_m_(pitch_m) {
  std::sort(positions_.begin(), positions_.end());
  positions_.erase(std::unique(positions_.begin(), positions_.end()), positions_.end());
}

int PositionSet::min() const {
  if (positions_.empty()) throw InvalidArgument("empty position set has no minimum");
  return positions_.front();
}

int PositionSet::max() const {
  if (positions_.empty()) throw InvalidArgument("empty position set has no maximum");
  return positions_.back();
}

bool PositionSet::contains(int n) const {
  return std::binary_search(positions_.begin(), positions_.end(), n);
}

std::ptrdiff_t PositionSet::index_of(int n) const {
  auto it = std::lower_bound(positions_.begin(), positions_.end(), n);
  if (it == positions_.end() || *it != n) return -1;
  return it - positions_.begin();
}

bool PositionSet::is_subset_of(const PositionSet& other) const {
  return std::includes(other.positions_.begin(), other.positions_.end(), positions_.begin(),
                       positions_.end());
}

PositionSet PositionSet::with_pitch(double pitch_m) const {
  PositionSet out = *this;
  out.pitch_m_ = pitch_m;
  return out;
}

double ApodizationVector::at(int n) const {
  if (!covers(n)) return 0.0;
  return values[static_cast<std::size_t>(n - offset)];
}

double ApodizationVector::sum() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

ApodizationVector ApodizationVector::constant(int first, int last, double value) {
  if (last < first) throw InvalidArgument("apodization range is empty");
  return {first, std::vector<double>(static_cast<std::size_t>(last - first + 1), value)};
}

std::string_view to_string(Variant v) {
  return v == Variant::scoba ? "scoba" : "scobar";
}

Variant variant_from_string(std::string_view s) {
  if (s == "scoba") return Variant::scoba;
  if (s == "scobar") return Variant::scobar;
  throw InvalidArgument("unknown sparse variant '" + std::string(s) + "'");
}

PositionSet make_ula(int N) {
  if (N < 1) throw InvalidArgument("ULA half-count N must be >= 1");
  std::vector<int> p(static_cast<std::size_t>(2 * N - 1));
  std::iota(p.begin(), p.end(), -(N - 1));
  return PositionSet(std::move(p));
}

SumCoArray sumset(const PositionSet& J) {
  if (J.empty()) throw InvalidArgument("sumset of an empty position set");
  const int lo = 2 * J.min();
  const int hi = 2 * J.max();
  ApodizationVector mult{lo, std::vector<double>(static_cast<std::size_t>(hi - lo + 1), 0.0)};
  for (int i : J) {
    for (int j : J) mult.values[static_cast<std::size_t>(i + j - lo)] += 1.0;
  }
  std::vector<int> sums;
  for (int s = lo; s <= hi; ++s) {
    if (mult.at(s) > 0.0) sums.push_back(s);
  }
  return {PositionSet(std::move(sums), J.pitch_m()), std::move(mult)};
}

std::vector<std::int64_t> linear_convolve(std::span<const std::int64_t> a,
                                          std::span<const std::int64_t> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<std::int64_t> out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

ApodizationVector intrinsic_apodization(const PositionSet& J) {
  if (J.empty()) throw InvalidArgument("intrinsic apodization of an empty position set");
  const int lo = J.min();
  std::vector<std::int64_t> indicator(static_cast<std::size_t>(J.max() - lo + 1), 0);
  for (int n : J) indicator[static_cast<std::size_t>(n - lo)] = 1;
  const auto conv = linear_convolve(indicator, indicator);
  ApodizationVector a{2 * lo, {}};
  a.values.assign(conv.begin(), conv.end());
  return a;
}

bool is_sparse_array(const PositionSet& J, const PositionSet& I) {
  if (J.empty() || I.empty()) throw InvalidArgument("sparse-array test needs non-empty sets");
  if (J.size() >= I.size() || !J.is_subset_of(I)) return false;
  return I.is_subset_of(sumset(J).sumset);
}

int scoba_element_count(int A, int B) { return 2 * A + 2 * B - 3; }
int scobar_element_count(int A, int B) { return 4 * A + 2 * B - 5; }
int scoba_aperture_span(int A, int B) { return 2 * A * (B - 1); }

namespace {

void check_factorization(int N, int A, int B) {
  if (A < 1 || B < 1) throw InvalidArgument("A and B must be positive");
  if (static_cast<long long>(A) * B != N) {
    throw InvalidArgument("A*B = " + std::to_string(static_cast<long long>(A) * B) +
                          " does not equal N = " + std::to_string(N));
  }
}

std::vector<int> scoba_positions(int A, int B) {
  std::vector<int> p;
  for (int n = -(A - 1); n <= A - 1; ++n) p.push_back(n);
  for (int n = -(B - 1); n <= B - 1; ++n) p.push_back(n * A);
  return p;
}

SparseDesign finish(Variant v, int N, int A, int B, std::vector<int> positions) {
  SparseDesign d;
  d.variant = v;
  d.N = N;
  d.A = A;
  d.B = B;
  d.elements = PositionSet(std::move(positions));
  d.element_count = static_cast<int>(d.elements.size());
  d.coarray = sumset(d.elements);
  return d;
}

}  // namespace

SparseDesign build_scoba(int N, int A, int B) {
  check_factorization(N, A, B);
  return finish(Variant::scoba, N, A, B, scoba_positions(A, B));
}

SparseDesign build_scobar(int N, int A, int B) {
  check_factorization(N, A, B);
  if (B <= 1) throw InvalidArgument("SCOBAR requires B > 1 (B = 1 is the full array)");
  auto p = scoba_positions(A, B);
  for (int m = N - A; m <= N - 1; ++m) {
    p.push_back(m);
    p.push_back(-m);
  }
  return finish(Variant::scobar, N, A, B, std::move(p));
}

SparseDesign build_design(Variant v, int N, int A, int B) {
  return v == Variant::scoba ? build_scoba(N, A, B) : build_scobar(N, A, B);
}

bool is_prime(int n) {
  if (n < 2) return false;
  for (int k = 2; static_cast<long long>(k) * k <= n; ++k) {
    if (n % k == 0) return false;
  }
  return true;
}

std::vector<int> divisors(int n) {
  std::vector<int> d;
  for (int k = 1; k <= n; ++k) {
    if (n % k == 0) d.push_back(k);
  }
  return d;
}

namespace {

// max{m | n : m^2 <= n} and min{m | n : m^2 >= n}.
std::pair<int, int> divisors_around_root(int n) {
  int below = 1;
  int above = n;
  for (int m : divisors(n)) {
    const long long sq = static_cast<long long>(m) * m;
    if (sq <= n) below = std::max(below, m);
    if (sq >= n) above = std::min(above, m);
  }
  return {below, above};
}

void dedupe(std::vector<FactorPair>& v) {
  std::vector<FactorPair> out;
  for (const auto& p : v) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  v = std::move(out);
}

}  // namespace

DesignOptimum optimize_scoba(int N) {
  if (N < 2) throw InvalidArgument("optimize_scoba requires N >= 2");
  const auto [d1_max, d2_min] = divisors_around_root(N);
  DesignOptimum opt;
  opt.solutions = {{d1_max, d2_min}, {d2_min, d1_max}};
  dedupe(opt.solutions);
  opt.degenerate = is_prime(N);
  return opt;
}

DesignOptimum optimize_scobar(int N) {
  if (N < 2) throw InvalidArgument("optimize_scobar requires N >= 2");
  const auto [d3_max, d4_min] = divisors_around_root(2 * N);
  const bool low_even = d3_max % 2 == 0;
  const bool high_even = d4_min % 2 == 0;

  DesignOptimum opt;
  if (low_even) opt.solutions.push_back({d3_max / 2, d4_min});
  if (high_even) opt.solutions.push_back({d4_min / 2, d3_max});
  // d3_max * d4_min = 2N, so at least one of them is even.
  dedupe(opt.solutions);
  std::erase_if(opt.solutions, [](const FactorPair& p) { return p.B <= 1; });
  std::stable_sort(opt.solutions.begin(), opt.solutions.end(),
                   [](const FactorPair& a, const FactorPair& b) {
                     const int ka = std::abs(2 * a.A - a.B);
                     const int kb = std::abs(2 * b.A - b.B);
                     if (ka != kb) return ka < kb;
                     return std::abs(a.A - a.B) < std::abs(b.A - b.B);
                   });
  opt.degenerate = is_prime(N);
  return opt;
}

FactorPair minimize_aperture(int N) {
  int largest = 0;
  int smallest = 0;
  for (int m : divisors(std::max(N, 1))) {
    if (m <= 1 || m >= N) continue;
    if (smallest == 0) smallest = m;
    largest = m;
  }
  if (largest == 0) {
    throw NoNontrivialDivisor("N = " + std::to_string(N) +
                              " has no non-trivial divisor; aperture cannot be reduced");
  }
  return {largest, smallest};
}

}  // namespace coba
