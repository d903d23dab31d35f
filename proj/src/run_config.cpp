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

#include "coba/run_config.hpp"

#include <cmath>
#include <numbers>

#include "coba/errors.hpp"

namespace coba {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

template <typename T>
void read_key(const nlohmann::json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument(std::string("config key '") + key + "' has the wrong type");
  }
}

void read_imaging(const nlohmann::json& j, ImagingConfig& im) {
  read_key(j, "speed_of_sound_m_per_s", im.speed_of_sound);
  read_key(j, "center_frequency_hz", im.center_frequency);
  read_key(j, "sampling_frequency_hz", im.sampling_frequency);
  read_key(j, "pitch_m", im.pitch);
  read_key(j, "element_half_count", im.element_half_count);
  read_key(j, "depth_min_m", im.depth_min);
  read_key(j, "depth_max_m", im.depth_max);
  read_key(j, "dynamic_range_db", im.dynamic_range_db);
  if (j.contains("scan_angles_deg")) {
    std::vector<double> deg;
    read_key(j, "scan_angles_deg", deg);
    im.scan_angles.clear();
    for (double a : deg) im.scan_angles.push_back(a * kDeg);
  } else if (j.contains("scan_angle_step_deg")) {
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;
    read_key(j, "scan_angle_min_deg", lo);
    read_key(j, "scan_angle_max_deg", hi);
    read_key(j, "scan_angle_step_deg", step);
    if (!(step > 0.0) || hi < lo) throw InvalidArgument("scan angle range is empty or step <= 0");
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    im.scan_angles.clear();
    for (long k = 0; k <= n; ++k) im.scan_angles.push_back((lo + static_cast<double>(k) * step) * kDeg);
  }
}

void read_filter(const nlohmann::json& j, FilterSpec& f) {
  std::string kind = "bandpass";
  read_key(j, "kind", kind);
  if (kind == "bandpass") {
    f.kind = FilterKind::bandpass;
  } else if (kind == "highpass") {
    f.kind = FilterKind::highpass;
  } else {
    throw InvalidArgument("filter kind must be bandpass or highpass");
  }
  read_key(j, "low_hz", f.low_hz);
  read_key(j, "high_hz", f.high_hz);
  read_key(j, "cutoff_hz", f.cutoff_hz);
  read_key(j, "taps", f.taps);
  std::string window = "hanning";
  read_key(j, "window", window);
  if (window != "hanning") throw InvalidArgument("only the hanning window is supported");
}

}  // namespace

Apodization default_apodization(Method m) {
  return (m == Method::coba || m == Method::scobar) ? Apodization::triangle : Apodization::unity;
}

RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  RunConfig cfg;
  if (j.contains("imaging")) read_imaging(j.at("imaging"), cfg.imaging);
  cfg.filter = FilterSpec::harmonic_bandpass(cfg.imaging.center_frequency);
  cfg.pulse.center_frequency = cfg.imaging.center_frequency;
  cfg.pulse.fs = cfg.imaging.sampling_frequency;
  if (j.contains("pulse")) read_key(j.at("pulse"), "cycles", cfg.pulse.cycles);
  if (j.contains("method")) {
    std::string m;
    read_key(j, "method", m);
    cfg.method = method_from_string(m);
  }
  if (j.contains("design") && !j.at("design").is_null()) {
    FactorPair p;
    read_key(j.at("design"), "A", p.A);
    read_key(j.at("design"), "B", p.B);
    if (p.A < 1 || p.B < 1) throw InvalidArgument("design needs positive A and B");
    cfg.design = p;
  }
  if (j.contains("apodization")) {
    std::string a;
    read_key(j, "apodization", a);
    cfg.apodization = apodization_from_string(a);
  }
  if (j.contains("filter")) read_filter(j.at("filter"), cfg.filter);
  if (j.contains("phantom")) {
    cfg.phantom = phantom_from_json(j.at("phantom"));
  } else if (j.contains("phantom_file")) {
    std::string file;
    read_key(j, "phantom_file", file);
    cfg.phantom = phantom_from_json(read_json_file(base_dir / file));
  }
  read_key(j, "spreading", cfg.spreading);
  if (j.contains("output_dir")) {
    std::string dir;
    read_key(j, "output_dir", dir);
    cfg.output_dir = dir;
  }
  read_key(j, "threads", cfg.threads);

  cfg.imaging.validate();
  if (is_sparse(cfg.method) && !cfg.design) {
    throw InvalidArgument("method " + std::string(to_string(cfg.method)) + " requires a design {A, B}");
  }
  if (cfg.design && cfg.design->A * cfg.design->B != cfg.imaging.element_half_count) {
    throw InvalidArgument("design A * B must equal element_half_count");
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_json_file(path), path.parent_path());
}

std::optional<SparseDesign> design_for(const RunConfig& cfg, Method method) {
  if (!is_sparse(method)) return std::nullopt;
  const int N = cfg.imaging.element_half_count;
  const Variant v = method == Method::scoba ? Variant::scoba : Variant::scobar;
  FactorPair p;
  if (cfg.design) {
    p = *cfg.design;
  } else {
    p = v == Variant::scoba ? optimize_scoba(N).canonical() : optimize_scobar(N).canonical();
  }
  return build_design(v, N, p.A, p.B);
}

}  // namespace coba
