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

#include "coba/geometry.hpp"

namespace coba {

enum class Objective { element_count, aperture };

struct BruteForceOptimum {
  FactorPair pair;
  long long value = 0;
};

/**
 * Exhaustive reference for the design optimizers.
 *
 * Walks every factor pair A*B = N (B > 1 for SCOBAR and for the aperture
 * objective), builds the element set with std::set and measures it directly:
 * element_count is the number of distinct positions, aperture is the index
 * span max - min. The first minimizer in ascending A wins. Shares no code
 * with the closed-form optimizers.
 */
BruteForceOptimum brute_force_design_optimum(int N, Variant variant, Objective objective);

}  // namespace coba
