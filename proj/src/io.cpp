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

#include "coba/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "coba/errors.hpp"

namespace coba {

namespace {

constexpr char kMagic[4] = {'C', 'B', 'K', '1'};
constexpr double kDeg = std::numbers::pi / 180.0;

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u32(std::string& out, std::uint32_t v) { put_le(out, v); }
void put_i32(std::string& out, std::int32_t v) { put_le(out, static_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
void put_f32(std::string& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  template <typename U>
  U get_le() {
    unsigned char buf[sizeof(U)];
    if (!is_.read(reinterpret_cast<char*>(buf), sizeof(U))) {
      throw IoError("channel data file is truncated");
    }
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
  }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::int32_t i32() { return static_cast<std::int32_t>(get_le<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }
  float f32() { return std::bit_cast<float>(get_le<std::uint32_t>()); }

 private:
  std::istream& is_;
};

}  // namespace

void write_channel_data(std::ostream& os, const ChannelData& data) {
  if (data.samples.rows() != data.element_positions.size()) {
    throw InvalidArgument("channel data rows do not match the element list");
  }
  std::string out;
  out.reserve(60 + 4 * data.samples.rows() * (data.samples.cols() + 1));
  out.append(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(data.samples.rows()));
  put_u32(out, static_cast<std::uint32_t>(data.samples.cols()));
  put_f64(out, data.config.sampling_frequency);
  put_f64(out, data.config.center_frequency);
  put_f64(out, data.config.speed_of_sound);
  put_f64(out, data.config.pitch);
  put_f64(out, data.t0);
  for (int p : data.element_positions) put_i32(out, p);
  for (double v : data.samples.data()) put_f32(out, static_cast<float>(v));
  if (!os.write(out.data(), static_cast<std::streamsize>(out.size()))) {
    throw IoError("failed writing channel data");
  }
}

ChannelData read_channel_data(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("not a channel data file (bad magic)");
  }
  Reader r(is);
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  ChannelData data;
  data.config.sampling_frequency = r.f64();
  data.config.center_frequency = r.f64();
  data.config.speed_of_sound = r.f64();
  data.config.pitch = r.f64();
  data.t0 = r.f64();
  std::vector<int> pos(rows);
  for (auto& p : pos) p = r.i32();
  if (!std::is_sorted(pos.begin(), pos.end()) ||
      std::adjacent_find(pos.begin(), pos.end()) != pos.end()) {
    throw IoError("channel data positions must be strictly increasing");
  }
  int reach = 0;
  for (int p : pos) reach = std::max(reach, std::abs(p));
  data.config.element_half_count = reach + 1;
  data.element_positions = PositionSet(std::move(pos), data.config.pitch);
  data.samples = Matrix(rows, cols);
  for (double& v : data.samples.data()) v = r.f32();
  return data;
}

void save_channel_data(const std::filesystem::path& path, const ChannelData& data) {
  std::ostringstream os(std::ios::binary);
  write_channel_data(os, data);
  write_file_atomic(path, os.str());
}

ChannelData load_channel_data(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return read_channel_data(is);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

nlohmann::json design_to_json(const SparseDesign& d) {
  const auto& mult = d.coarray.multiplicity;
  std::vector<long long> intrinsic(mult.values.begin(), mult.values.end());
  const auto pos = d.elements.positions();
  const auto sum = d.coarray.sumset.positions();
  return {
      {"variant", std::string(to_string(d.variant))},
      {"N", d.N},
      {"A", d.A},
      {"B", d.B},
      {"positions", std::vector<int>(pos.begin(), pos.end())},
      {"element_count", d.element_count},
      {"sumset", std::vector<int>(sum.begin(), sum.end())},
      {"intrinsic", intrinsic},
      {"offset", mult.offset},
  };
}

SparseDesign design_from_json(const nlohmann::json& j) {
  try {
    const auto variant = variant_from_string(j.at("variant").get<std::string>());
    SparseDesign d = build_design(variant, j.at("N").get<int>(), j.at("A").get<int>(),
                                  j.at("B").get<int>());
    if (j.contains("positions")) {
      const auto pos = d.elements.positions();
      if (j.at("positions").get<std::vector<int>>() != std::vector<int>(pos.begin(), pos.end())) {
        throw InvalidArgument("design positions disagree with (variant, N, A, B)");
      }
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed design document: ") + e.what());
  }
}

nlohmann::json phantom_to_json(const PhantomSpec& spec) {
  nlohmann::json j;
  j["scatterers"] = nlohmann::json::array();
  for (const auto& s : spec.scatterers) {
    j["scatterers"].push_back({{"r_mm", s.r * 1e3}, {"theta_deg", s.theta / kDeg}, {"amp", s.amplitude}});
  }
  if (spec.cyst) {
    const auto& c = *spec.cyst;
    j["cyst"] = {{"center_mm", {c.center_x * 1e3, c.center_z * 1e3}},
                 {"radius_mm", c.radius * 1e3},
                 {"density", c.density_per_mm2},
                 {"seed", c.seed}};
  }
  return j;
}

PhantomSpec phantom_from_json(const nlohmann::json& j) {
  PhantomSpec spec;
  try {
    if (j.contains("scatterers")) {
      for (const auto& s : j.at("scatterers")) {
        spec.scatterers.push_back({s.at("r_mm").get<double>() * 1e-3,
                                   s.at("theta_deg").get<double>() * kDeg,
                                   s.value("amp", 1.0)});
      }
    }
    if (j.contains("cyst") && !j.at("cyst").is_null()) {
      const auto& c = j.at("cyst");
      CystSpec cyst;
      const auto center = c.at("center_mm").get<std::vector<double>>();
      if (center.size() != 2) throw InvalidArgument("cyst center_mm needs [x, z]");
      cyst.center_x = center[0] * 1e-3;
      cyst.center_z = center[1] * 1e-3;
      cyst.radius = c.at("radius_mm").get<double>() * 1e-3;
      cyst.density_per_mm2 = c.value("density", cyst.density_per_mm2);
      cyst.seed = c.value("seed", cyst.seed);
      spec.cyst = cyst;
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed phantom document: ") + e.what());
  }
  return spec;
}

Phantom realize_phantom(const PhantomSpec& spec, const ImagingConfig& config) {
  Phantom ph;
  ph.scatterers = spec.scatterers;
  if (spec.cyst) {
    Phantom speckle = make_cyst_phantom(config, *spec.cyst);
    ph.seed = speckle.seed;
    ph.scatterers.insert(ph.scatterers.end(), speckle.scatterers.begin(), speckle.scatterers.end());
  }
  return ph;
}

std::string encode_pgm(const BModeImage& img) {
  const std::size_t rows = img.log_image.rows();
  const std::size_t cols = img.log_image.cols();
  std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  const double dr = img.dynamic_range_db;
  for (double db : img.log_image.data()) {
    const double level = std::clamp((db + dr) / dr, 0.0, 1.0) * 255.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(level))));
  }
  return out;
}

std::string encode_f32(const Matrix& m) {
  std::string out;
  out.reserve(4 * m.data().size());
  for (double v : m.data()) put_f32(out, static_cast<float>(v));
  return out;
}

nlohmann::json image_sidecar(const BModeImage& img) {
  return {{"rows", img.intensity.rows()},
          {"cols", img.intensity.cols()},
          {"depth_axis", img.depth_axis},
          {"angles", img.line_angles},
          {"dr_db", img.dynamic_range_db}};
}

BModeImage load_image(const std::filesystem::path& raw, const std::filesystem::path& sidecar) {
  const auto meta = read_json_file(sidecar);
  BModeImage img;
  std::size_t rows = 0;
  std::size_t cols = 0;
  try {
    rows = meta.at("rows").get<std::size_t>();
    cols = meta.at("cols").get<std::size_t>();
    img.depth_axis = meta.at("depth_axis").get<std::vector<double>>();
    img.line_angles = meta.at("angles").get<std::vector<double>>();
    img.dynamic_range_db = meta.at("dr_db").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(sidecar.string() + ": " + e.what());
  }
  if (img.depth_axis.size() != rows || img.line_angles.size() != cols) {
    throw IoError(sidecar.string() + ": axis lengths disagree with rows/cols");
  }
  const std::string bytes = read_file(raw);
  if (bytes.size() != 4 * rows * cols) {
    throw IoError(raw.string() + ": expected " + std::to_string(4 * rows * cols) + " bytes");
  }
  std::istringstream is(bytes, std::ios::binary);
  Reader r(is);
  img.intensity = Matrix(rows, cols);
  for (double& v : img.intensity.data()) v = r.f32();
  img.log_image = log_compress(img.intensity, img.dynamic_range_db);
  return img;
}

std::string encode_lines_f32(const BeamformedLines& lines) { return encode_f32(lines.rf); }

std::string encode_lines_csv(const BeamformedLines& lines) {
  std::ostringstream os;
  os << std::setprecision(9);
  for (std::size_t i = 0; i < lines.rf.rows(); ++i) {
    const auto row = lines.rf.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k];
    os << '\n';
  }
  return os.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.flush();
    if (!os) throw IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace coba
