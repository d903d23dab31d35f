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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coba/beamform.hpp"
#include "coba/io.hpp"
#include "coba/simulate.hpp"

namespace coba {

/**
 * One reproducible run, read from a JSON document.
 *
 * Physical quantities carry their unit in the key name:
 *
 *   {
 *     "imaging": {
 *       "speed_of_sound_m_per_s": 1540, "center_frequency_hz": 3.5e6,
 *       "sampling_frequency_hz": 1e8, "pitch_m": 2.2e-4, "element_half_count": 33,
 *       "scan_angle_min_deg": -4, "scan_angle_max_deg": 4, "scan_angle_step_deg": 0.1,
 *       "depth_min_m": 0.025, "depth_max_m": 0.075, "dynamic_range_db": 60
 *     },
 *     "pulse": {"cycles": 2},
 *     "method": "scoba",
 *     "design": {"A": 3, "B": 11},
 *     "apodization": "das_match",
 *     "filter": {"kind": "bandpass", "low_hz": 5.25e6, "high_hz": 8.75e6, "taps": 101},
 *     "phantom": {"scatterers": [{"r_mm": 50, "theta_deg": 0, "amp": 1}]},
 *     "output_dir": "out",
 *     "threads": 1
 *   }
 *
 * "scan_angles_deg": [..] may replace the min/max/step triple, and
 * "phantom_file" may name a phantom document instead of the inline object
 * (resolved relative to the config file). Missing keys keep their defaults.
 */
struct RunConfig {
  ImagingConfig imaging;
  PulseSpec pulse;
  Method method = Method::das;
  std::optional<FactorPair> design;
  // Unset: unity for DAS and SCOBA, triangle for COBA and SCOBAR.
  std::optional<Apodization> apodization;
  FilterSpec filter;
  PhantomSpec phantom;
  bool spreading = true;
  std::filesystem::path output_dir = "out";
  unsigned threads = 1;
};

/// Throws InvalidArgument with the offending key on malformed input.
RunConfig run_config_from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

Apodization default_apodization(Method m);

/// Sparse design for `method` (nullopt for DAS and COBA). Uses the configured
/// (A, B) when present, otherwise the element-count optimum.
std::optional<SparseDesign> design_for(const RunConfig& cfg, Method method);

}  // namespace coba
