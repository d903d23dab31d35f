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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coba/beamform.hpp"
#include "coba/geometry.hpp"
#include "coba/imaging.hpp"
#include "coba/simulate.hpp"

namespace coba {

// Channel data file, little-endian:
//   "CBK1", u32 element_count, u32 sample_count,
//   f64 fs, f64 f0, f64 c, f64 pitch, f64 t0,
//   i32 positions[element_count],
//   f32 samples[element_count][sample_count].
void write_channel_data(std::ostream& os, const ChannelData& data);
ChannelData read_channel_data(std::istream& is);
void save_channel_data(const std::filesystem::path& path, const ChannelData& data);
ChannelData load_channel_data(const std::filesystem::path& path);

nlohmann::json design_to_json(const SparseDesign& design);
SparseDesign design_from_json(const nlohmann::json& j);

/// Point scatterers plus an optional speckle cyst, as stored on disk
/// (millimetres and degrees).
struct PhantomSpec {
  std::vector<Scatterer> scatterers;
  std::optional<CystSpec> cyst;
};

nlohmann::json phantom_to_json(const PhantomSpec& spec);
PhantomSpec phantom_from_json(const nlohmann::json& j);
/// Explicit scatterers followed by the generated speckle, if any.
Phantom realize_phantom(const PhantomSpec& spec, const ImagingConfig& config);

/// Log image mapped [-dr, 0] dB to [0, 255], 8-bit binary PGM.
std::string encode_pgm(const BModeImage& img);
/// Raw f32 envelope matrix [depth x lines], row-major.
std::string encode_f32(const Matrix& m);
nlohmann::json image_sidecar(const BModeImage& img);
/// Reads an envelope image back from its raw matrix and sidecar.
BModeImage load_image(const std::filesystem::path& raw, const std::filesystem::path& sidecar);

/// Beamformed RF lines [angles x samples] as f32 or CSV (one line per row).
std::string encode_lines_f32(const BeamformedLines& lines);
std::string encode_lines_csv(const BeamformedLines& lines);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace coba
