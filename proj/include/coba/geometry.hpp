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
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace coba {

/**
 * Integer element positions on a grid of pitch d.
 *
 * Index n denotes an element at lateral coordinate n*d. The stored list is
 * always strictly increasing; the constructor sorts and drops duplicates.
 * Arrays with 2N-1 elements are centred on index 0. Even element counts are
 * represented by shifting the index range (e.g. {0, ..., 2M-1}); every set
 * operation here is translation-covariant, so no separate code path exists.
 */
class PositionSet {
 public:
  PositionSet() = default;
  explicit PositionSet(std::vector<int> positions, double pitch_m = 0.0);

  std::span<const int> positions() const { return positions_; }
  std::size_t size() const { return positions_.size(); }
  bool empty() const { return positions_.empty(); }
  int min() const;
  int max() const;
  bool contains(int n) const;
  // Index of n within the sorted list, or -1.
  std::ptrdiff_t index_of(int n) const;
  bool is_subset_of(const PositionSet& other) const;

  double pitch_m() const { return pitch_m_; }
  PositionSet with_pitch(double pitch_m) const;

  auto begin() const { return positions_.begin(); }
  auto end() const { return positions_.end(); }

  friend bool operator==(const PositionSet& a, const PositionSet& b) {
    return a.positions_ == b.positions_;
  }

 private:
  std::vector<int> positions_;
  double pitch_m_ = 0.0;
};

/// Weights indexed by grid position: values[k] belongs to position offset + k.
struct ApodizationVector {
  int offset = 0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  int first() const { return offset; }
  int last() const { return offset + static_cast<int>(values.size()) - 1; }
  bool covers(int n) const { return n >= first() && n <= last(); }
  // Zero outside the stored range.
  double at(int n) const;
  double sum() const;

  static ApodizationVector constant(int first, int last, double value);
  friend bool operator==(const ApodizationVector&, const ApodizationVector&) = default;
};

struct SumCoArray {
  PositionSet sumset;
  // Ordered-pair count per position over [2*min, 2*max]; zero on gaps.
  ApodizationVector multiplicity;
};

enum class Variant { scoba, scobar };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);

struct SparseDesign {
  Variant variant = Variant::scoba;
  int N = 0;
  int A = 0;
  int B = 0;
  PositionSet elements;
  int element_count = 0;
  SumCoArray coarray;
};

struct FactorPair {
  int A = 0;
  int B = 0;
  friend bool operator==(const FactorPair&, const FactorPair&) = default;
};

struct DesignOptimum {
  // Canonical solution first.
  std::vector<FactorPair> solutions;
  // Set when the only feasible designs are fully populated (prime N).
  bool degenerate = false;

  FactorPair canonical() const { return solutions.front(); }
};

/// Full ULA {-(N-1), ..., N-1} of 2N-1 elements.
PositionSet make_ula(int N);

SumCoArray sumset(const PositionSet& J);

/// Self-convolution of the indicator vector of J.
ApodizationVector intrinsic_apodization(const PositionSet& J);

/// Discrete linear convolution of two integer sequences; equivalently the
/// coefficient vector of the product of the two polynomials they define.
std::vector<std::int64_t> linear_convolve(std::span<const std::int64_t> a,
                                          std::span<const std::int64_t> b);

/// J is a strict subset of I and I is contained in the sumset of J.
bool is_sparse_array(const PositionSet& J, const PositionSet& I);

/// U = U_A ∪ U_B with U_A = {-(A-1),...,A-1}, U_B = {nA : |n| <= B-1}.
SparseDesign build_scoba(int N, int A, int B);

/// V = U ∪ U_C with U_C = {n : N-A <= |n| <= N-1}. Requires B > 1.
SparseDesign build_scobar(int N, int A, int B);

SparseDesign build_design(Variant v, int N, int A, int B);

int scoba_element_count(int A, int B);
int scobar_element_count(int A, int B);

/// Closed-form minimal element count for SCOBA over AB = N.
/// Ties resolve to A <= B.
DesignOptimum optimize_scoba(int N);

/// Closed-form minimal element count for SCOBAR over AB = N, B > 1, using
/// the parity case split on the divisors of 2N around sqrt(2N). Ties resolve
/// by smallest |2A - B|, then smallest |A - B|.
DesignOptimum optimize_scobar(int N);

/// SCOBA parameters with the smallest physical aperture 2A(B-1)d.
/// Throws NoNontrivialDivisor for prime N.
FactorPair minimize_aperture(int N);

/// Physical aperture of a SCOBA design in grid steps.
int scoba_aperture_span(int A, int B);

bool is_prime(int n);
std::vector<int> divisors(int n);

}  // namespace coba
