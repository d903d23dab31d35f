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

// Command-line front end: design, beampattern, simulate, beamform, metrics.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 IO error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "coba/beamform.hpp"
#include "coba/beampattern.hpp"
#include "coba/errors.hpp"
#include "coba/geometry.hpp"
#include "coba/imaging.hpp"
#include "coba/io.hpp"
#include "coba/run_config.hpp"
#include "coba/simulate.hpp"
#include "coba/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace coba;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;
constexpr double kDeg = std::numbers::pi / 180.0;

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Records every file a command writes, with its hash, for the run manifest.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, std::string_view bytes) {
    write_file_atomic(dir_ / name, bytes);
    files_[name] = hex64(fnv1a64(bytes));
  }
  const fs::path& dir() const { return dir_; }

  void manifest(const std::string& command, const json& config, const json& seeds) {
    const std::string canonical = config.dump();
    json m = {{"tool", "coba"},
              {"version", kVersion},
              {"command", command},
              {"config_hash", hex64(fnv1a64(canonical))},
              {"config", config},
              {"seeds", seeds},
              {"outputs", files_}};
    write_file_atomic(dir_ / ("manifest_" + command + ".json"), dump(m));
  }

 private:
  fs::path dir_;
  std::map<std::string, std::string> files_;
};

json seeds_of(const RunConfig& cfg) {
  json s = json::array();
  if (cfg.phantom.cyst) s.push_back(cfg.phantom.cyst->seed);
  return s;
}

// ---------------------------------------------------------------- design

struct DesignArgs {
  int N = 0;
  std::string variant;
  int A = 0;
  int B = 0;
  std::string optimize;
  std::string out;
};

int cmd_design(const DesignArgs& a) {
  const Variant v = variant_from_string(a.variant);
  if (a.N < 2) throw InvalidArgument("N must be >= 2");
  FactorPair p{a.A, a.B};
  if (!a.optimize.empty()) {
    if (a.A || a.B) throw InvalidArgument("--optimize cannot be combined with --A/--B");
    if (a.optimize == "elements") {
      const auto opt = v == Variant::scoba ? optimize_scoba(a.N) : optimize_scobar(a.N);
      if (opt.degenerate) {
        std::fprintf(stderr,
                     "note: N = %d is prime; every factorisation gives back the fully populated "
                     "array\n",
                     a.N);
      }
      p = opt.canonical();
    } else if (a.optimize == "aperture") {
      if (v != Variant::scoba) throw InvalidArgument("aperture optimisation applies to scoba");
      if (is_prime(a.N)) {
        throw NoNontrivialDivisor("N = " + std::to_string(a.N) +
                                  " is prime: no factorisation shrinks the aperture below the "
                                  "full array");
      }
      p = minimize_aperture(a.N);
    } else {
      throw InvalidArgument("--optimize takes 'elements' or 'aperture'");
    }
  } else if (!(a.A > 0 && a.B > 0)) {
    throw InvalidArgument("give --A and --B, or --optimize");
  }

  const SparseDesign d = build_design(v, a.N, p.A, p.B);
  const int full = 2 * a.N - 1;
  const auto& sum = d.coarray.sumset;
  std::ostringstream pos;
  for (int n : d.elements) pos << (pos.tellp() > 0 ? " " : "") << n;
  std::printf("variant      %s\n", std::string(to_string(v)).c_str());
  std::printf("N            %d (full array %d elements)\n", a.N, full);
  std::printf("A, B         %d, %d\n", p.A, p.B);
  std::printf("elements     %d of %d (%ld%%)\n", d.element_count, full,
              std::lround(100.0 * d.element_count / full));
  std::printf("positions    %s\n", pos.str().c_str());
  std::printf("sumset span  [%d, %d], %zu positions\n", sum.min(), sum.max(), sum.size());
  std::printf("aperture     %d pitches\n", d.elements.max() - d.elements.min());
  if (!a.out.empty()) write_file_atomic(a.out, dump(design_to_json(d)));
  return 0;
}

// ----------------------------------------------------------- beampattern

struct PatternArgs {
  std::string config;
  int N = 10;
  double pitch_wavelengths = 0.5;
  std::size_t points = AngularGrid::kDefaultCount;
  std::vector<std::string> methods{"das", "coba", "scoba", "scobar"};
  int A = 0;
  int B = 0;
  bool das_match = false;
  std::string out_dir = "out";
};

json optional_metric(auto&& fn) {
  try {
    return fn();
  } catch (const NotFound&) {
    return nullptr;
  }
}

int cmd_beampattern(const PatternArgs& a) {
  int N = a.N;
  double ratio = a.pitch_wavelengths;
  std::optional<FactorPair> fixed;
  if (a.A || a.B) fixed = FactorPair{a.A, a.B};
  std::optional<Apodization> apod_override;
  Method config_method = Method::das;
  if (!a.config.empty()) {
    const RunConfig rc = load_run_config(a.config);
    N = rc.imaging.element_half_count;
    ratio = rc.imaging.pitch / rc.imaging.wavelength();
    if (rc.design) fixed = rc.design;
    apod_override = rc.apodization;
    config_method = rc.method;
  }
  if (N < 2) throw InvalidArgument("N must be >= 2");
  const auto grid = AngularGrid::uniform(a.points);
  Outputs out(a.out_dir);
  json metrics = json::object();
  for (const auto& name : a.methods) {
    const Method m = method_from_string(name);
    std::optional<SparseDesign> design;
    if (is_sparse(m)) {
      const Variant v = m == Method::scoba ? Variant::scoba : Variant::scobar;
      const FactorPair p = fixed ? *fixed
                                 : (v == Variant::scoba ? optimize_scoba(N).canonical()
                                                        : optimize_scobar(N).canonical());
      design = build_design(v, N, p.A, p.B);
    }
    Apodization apod = default_apodization(m);
    if (m == Method::scoba && a.das_match) apod = Apodization::das_match;
    if (apod_override && m == config_method) apod = *apod_override;

    const auto desired = desired_weights(m, N, design, apod);
    BeamPattern bp;
    if (m == Method::das) {
      bp = bp_weighted(make_ula(N), desired, grid, 1.0, ratio);
    } else {
      const PositionSet elements = design ? design->elements : make_ula(N);
      bp = bp_pairwise(elements, modified_weights(desired, intrinsic_apodization(elements)), grid,
                       1.0, ratio);
    }
    std::ostringstream csv;
    write_beampattern_csv(csv, bp);
    out.write(name + "_beampattern.csv", csv.str());
    metrics[name] = {
        {"apodization", std::string(to_string(apod))},
        {"elements", design ? design->element_count : 2 * N - 1},
        {"fwhm", optional_metric([&] { return json(lobe_metrics(bp).fwhm_sin_theta); })},
        {"psl_db", optional_metric([&] { return json(lobe_metrics(bp).psl_db); })},
        {"first_zero", optional_metric([&] { return json(first_zero(bp)); })},
    };
  }
  out.write("beampattern_metrics.json", dump(metrics));
  std::cout << dump(metrics);
  out.manifest("beampattern",
               {{"N", N}, {"pitch_wavelengths", ratio}, {"points", a.points}, {"methods", a.methods},
                {"A", fixed ? fixed->A : 0}, {"B", fixed ? fixed->B : 0}, {"das_match", a.das_match}},
               json::array());
  return 0;
}

// -------------------------------------------------------------- simulate

struct RunArgs {
  std::string config;
  std::string data;
  std::string out;
  bool all_methods = false;
  bool das_match = false;
  bool csv = false;
  int threads = -1;
};

fs::path default_data_path(const RunConfig& cfg) { return cfg.output_dir / "channels.cbk"; }

int cmd_simulate(const RunArgs& a) {
  RunConfig cfg = load_run_config(a.config);
  if (a.threads > 0) cfg.threads = static_cast<unsigned>(a.threads);
  const Phantom ph = realize_phantom(cfg.phantom, cfg.imaging);
  if (ph.scatterers.empty()) throw InvalidArgument("phantom has no scatterers");
  SimulationOptions opt;
  opt.spreading = cfg.spreading;
  const auto result = generate_channel_data(cfg.imaging, ph, cfg.pulse, opt, cfg.threads);

  const fs::path target = a.out.empty() ? default_data_path(cfg) : fs::path(a.out);
  std::ostringstream os(std::ios::binary);
  write_channel_data(os, result.data);
  Outputs out(target.parent_path().empty() ? fs::path(".") : target.parent_path());
  out.write(target.filename().string(), os.str());
  out.manifest("simulate", read_json_file(a.config), seeds_of(cfg));
  std::printf("%zu scatterers (%zu outside the depth window), %zu x %zu samples -> %s\n",
              ph.scatterers.size(), result.skipped, result.data.samples.rows(),
              result.data.samples.cols(), target.string().c_str());
  return 0;
}

// -------------------------------------------------------------- beamform

json image_metrics(const BModeImage& img, const RunConfig& cfg) {
  json m = json::object();
  json points = json::array();
  for (const auto& s : cfg.phantom.scatterers) {
    const double x = s.r * std::sin(s.theta);
    const double z = s.r * std::cos(s.theta);
    json p = {{"x_mm", x * 1e3}, {"z_mm", z * 1e3}};
    try {
      const auto r = point_resolution(img, x, z, 2e-3);
      p["lateral_fwhm_mm"] = r.lateral_m * 1e3;
      p["axial_fwhm_mm"] = r.axial_m * 1e3;
    } catch (const std::exception&) {
      p["lateral_fwhm_mm"] = nullptr;
      p["axial_fwhm_mm"] = nullptr;
    }
    points.push_back(p);
  }
  m["points"] = points;
  if (cfg.phantom.cyst) {
    const auto& c = *cfg.phantom.cyst;
    const auto [inner, bck] = default_cr_regions(c.center_x, c.center_z, c.radius, 2.0 * c.radius);
    try {
      m["contrast_ratio_db"] = contrast_ratio(img, inner, bck);
    } catch (const std::exception&) {
      m["contrast_ratio_db"] = nullptr;
    }
  }
  return m;
}

int cmd_beamform(const RunArgs& a) {
  RunConfig cfg = load_run_config(a.config);
  if (a.threads > 0) cfg.threads = static_cast<unsigned>(a.threads);
  const fs::path data_path = a.data.empty() ? default_data_path(cfg) : fs::path(a.data);
  ChannelData data = load_channel_data(data_path);
  // Acquisition parameters come from the file; the scan from the config.
  data.config.scan_angles = cfg.imaging.scan_angles;
  data.config.depth_min = cfg.imaging.depth_min;
  data.config.depth_max = cfg.imaging.depth_max;
  data.config.dynamic_range_db = cfg.imaging.dynamic_range_db;
  data.config.validate();
  const int N = cfg.imaging.element_half_count;

  std::vector<Method> methods{cfg.method};
  if (a.all_methods) methods = {Method::das, Method::coba, Method::scoba, Method::scobar};

  Outputs out(a.out.empty() ? cfg.output_dir : fs::path(a.out));
  json metrics = json::object();
  for (Method m : methods) {
    const auto design = design_for(cfg, m);
    Apodization apod = default_apodization(m);
    if (m == Method::scoba && a.das_match) apod = Apodization::das_match;
    if (cfg.apodization && m == cfg.method) apod = *cfg.apodization;
    const auto setup = make_setup(m, N, design, apod, cfg.filter, data.config.sampling_frequency);
    const auto lines = beamform_image(data, setup, cfg.threads);
    const auto img = make_bmode(lines, data.config.speed_of_sound, data.config.dynamic_range_db);

    const std::string name(to_string(m));
    out.write(name + "_lines.f32", encode_lines_f32(lines));
    if (a.csv) out.write(name + "_lines.csv", encode_lines_csv(lines));
    out.write(name + "_envelope.f32", encode_f32(img.intensity));
    out.write(name + "_envelope.json", dump(image_sidecar(img)));
    out.write(name + ".pgm", encode_pgm(img));
    json mm = image_metrics(img, cfg);
    mm["apodization"] = std::string(to_string(apod));
    mm["elements"] = setup.receive_elements.size();
    if (design) mm["design"] = {{"A", design->A}, {"B", design->B}};
    metrics[name] = mm;
  }
  out.write("metrics.json", dump(metrics));
  out.manifest("beamform", read_json_file(a.config), seeds_of(cfg));
  std::cout << dump(metrics);
  return 0;
}

// --------------------------------------------------------------- metrics

struct MetricsArgs {
  std::string image;
  std::string sidecar;
  std::vector<double> cyst;
  double offset_mm = 0.0;
  std::vector<double> points;
  std::string out;
};

int cmd_metrics(const MetricsArgs& a) {
  fs::path sidecar = a.sidecar;
  if (sidecar.empty()) sidecar = fs::path(a.image).replace_extension(".json");
  const BModeImage img = load_image(a.image, sidecar);
  json m = json::object();
  if (!a.cyst.empty()) {
    if (a.cyst.size() != 3) throw InvalidArgument("--cyst takes x_mm,z_mm,radius_mm");
    const double r = a.cyst[2] * 1e-3;
    const double offset = a.offset_mm > 0.0 ? a.offset_mm * 1e-3 : 2.0 * r;
    const auto [inner, bck] = default_cr_regions(a.cyst[0] * 1e-3, a.cyst[1] * 1e-3, r, offset);
    m["contrast_ratio_db"] = contrast_ratio(img, inner, bck);
  }
  if (a.points.size() % 2 != 0) throw InvalidArgument("--point takes x_mm,z_mm");
  json pts = json::array();
  for (std::size_t k = 0; k + 1 < a.points.size(); k += 2) {
    const auto r = point_resolution(img, a.points[k] * 1e-3, a.points[k + 1] * 1e-3, 2e-3);
    pts.push_back({{"x_mm", a.points[k]},
                   {"z_mm", a.points[k + 1]},
                   {"lateral_fwhm_mm", r.lateral_m * 1e3},
                   {"axial_fwhm_mm", r.axial_m * 1e3}});
  }
  m["points"] = pts;
  if (!a.out.empty()) write_file_atomic(a.out, dump(m));
  std::cout << dump(m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convolutional and sparse convolutional beamforming toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  DesignArgs da;
  auto* design = app.add_subcommand("design", "Sparse array design and summary table");
  design->add_option("N", da.N, "Half-count: the full array has 2N-1 elements")->required();
  design->add_option("variant", da.variant, "scoba or scobar")->required();
  design->add_option("--A", da.A, "Inner block half-width");
  design->add_option("--B", da.B, "Outer sub-array half-count");
  design->add_option("--optimize", da.optimize, "elements or aperture");
  design->add_option("--out", da.out, "Write the design JSON here");

  PatternArgs pa;
  auto* pattern = app.add_subcommand("beampattern", "Far-field beam patterns and lobe metrics");
  pattern->add_option("--config", pa.config, "Run config (array, pitch, design, apodization)");
  pattern->add_option("--N", pa.N, "Half-count when no config is given");
  pattern->add_option("--pitch-wavelengths", pa.pitch_wavelengths, "Pitch over wavelength");
  pattern->add_option("--points", pa.points, "Grid points in sin(theta)");
  pattern->add_option("--methods", pa.methods, "Methods to evaluate")->delimiter(',');
  pattern->add_option("--A", pa.A, "Sparse design A (default: element optimum)");
  pattern->add_option("--B", pa.B, "Sparse design B");
  pattern->add_flag("--das-match", pa.das_match, "SCOBA weights restricted to the full array");
  pattern->add_option("--out-dir", pa.out_dir, "Output directory");

  RunArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Point-scatterer channel data");
  simulate->add_option("--config", sa.config, "Run config")->required();
  simulate->add_option("--out", sa.out, "Channel data file (default <output_dir>/channels.cbk)");
  simulate->add_option("--threads", sa.threads, "Worker threads");

  RunArgs ba;
  auto* beamform = app.add_subcommand("beamform", "Beamform channel data into B-mode images");
  beamform->add_option("--config", ba.config, "Run config")->required();
  beamform->add_option("--data", ba.data, "Channel data file (default <output_dir>/channels.cbk)");
  beamform->add_option("--out-dir", ba.out, "Output directory (default from config)");
  beamform->add_flag("--all-methods", ba.all_methods, "Run DAS, COBA, SCOBA and SCOBAR");
  beamform->add_flag("--das-match", ba.das_match, "SCOBA weights restricted to the full array");
  beamform->add_flag("--csv", ba.csv, "Also write beamformed lines as CSV");
  beamform->add_option("--threads", ba.threads, "Worker threads");

  MetricsArgs ma;
  auto* metrics = app.add_subcommand("metrics", "Contrast ratio and point resolution of an image");
  metrics->add_option("--image", ma.image, "Raw f32 envelope matrix")->required();
  metrics->add_option("--sidecar", ma.sidecar, "Image JSON sidecar (default: image path .json)");
  metrics->add_option("--cyst", ma.cyst, "x_mm,z_mm,radius_mm")->delimiter(',');
  metrics->add_option("--offset-mm", ma.offset_mm, "Background disc lateral offset");
  metrics->add_option("--point", ma.points, "x_mm,z_mm of a reflector (repeatable)")->delimiter(',');
  metrics->add_option("--out", ma.out, "Write the metrics JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*design) return cmd_design(da);
    if (*pattern) return cmd_beampattern(pa);
    if (*simulate) return cmd_simulate(sa);
    if (*beamform) return cmd_beamform(ba);
    if (*metrics) return cmd_metrics(ma);
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  } catch (const NotFound& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
