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

#include "coba/design_oracle.hpp"

#include <limits>
#include <set>

#include "coba/errors.hpp"

namespace coba {

namespace {

std::set<int> element_set(Variant variant, int N, int A, int B) {
  std::set<int> s;
  for (int n = -(A - 1); n <= A - 1; ++n) s.insert(n);
  for (int n = -(B - 1); n <= B - 1; ++n) s.insert(n * A);
  if (variant == Variant::scobar) {
    for (int n = -(N - 1); n <= N - 1; ++n) {
      const int m = n < 0 ? -n : n;
      if (m >= N - A) s.insert(n);
    }
  }
  return s;
}

}  // namespace

BruteForceOptimum brute_force_design_optimum(int N, Variant variant, Objective objective) {
  if (N < 2) throw InvalidArgument("brute-force design search requires N >= 2");
  const bool need_b_above_one = variant == Variant::scobar || objective == Objective::aperture;

  BruteForceOptimum best{{0, 0}, std::numeric_limits<long long>::max()};
  for (int A = 1; A <= N; ++A) {
    if (N % A != 0) continue;
    const int B = N / A;
    if (need_b_above_one && B <= 1) continue;
    const auto s = element_set(variant, N, A, B);
    const long long value = objective == Objective::element_count
                                ? static_cast<long long>(s.size())
                                : static_cast<long long>(*s.rbegin() - *s.begin());
    if (value < best.value) best = {{A, B}, value};
  }
  if (best.pair.A == 0) {
    throw NoNontrivialDivisor("no feasible factor pair for N = " + std::to_string(N));
  }
  return best;
}

}  // namespace coba
