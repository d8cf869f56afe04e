#include "core/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace holo {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double number(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    throw Error(ErrorCode::Configuration, "config key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

int integer(const std::string& key, const std::string& v) {
  const double d = number(key, v);
  if (d != std::floor(d)) throw Error(ErrorCode::Configuration, "config key '" + key + "': expected an integer");
  return static_cast<int>(d);
}

std::pair<double, double> pair_of(const std::string& key, const std::string& v) {
  const auto c = v.find(',');
  if (c == std::string::npos)
    throw Error(ErrorCode::Configuration, "config key '" + key + "': expected 'a,b'");
  return {number(key, trim(v.substr(0, c))), number(key, trim(v.substr(c + 1)))};
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "mask.kind",          "mask.focal_mm",        "mask.charge",
      "mask.wavelength_nm", "mask.center_x_um",     "mask.center_y_um",
      "grid.size",          "grid.pitch_um",        "tilt.a1",
      "tilt.a2",            "tilt.phi0",            "noise.dark_hz",
      "noise.accidental_hz", "noise.signal_hz",     "noise.accidental_shape",
      "beam.waist_um",      "reference.mode",       "reference.pinhole_offset",
      "reference.pinhole_radius", "reference.amplitude_ratio", "reference.waist_um",
      "camera.render",      "camera.psf_sigma_px",  "camera.gain_mean",
      "camera.gain_dispersion", "camera.events_per_frame", "camera.threshold",
      "camera.window_radius",
  };
  return keys;
}

void SimConfig::validate() const {
  if (!is_power_of_two(grid.width) || !is_power_of_two(grid.height))
    throw Error(ErrorCode::Configuration, "grid.size must be a power of two");
  grid.validate();
  mask.validate();
  tilt.validate(grid);
  noise.validate();
  if (!(waist >= 2.0 * grid.pitch)) throw Error(ErrorCode::Configuration, "beam.waist_um undersampled");
  if (!(amplitude_ratio >= 0.0)) throw Error(ErrorCode::Configuration, "reference.amplitude_ratio must be >= 0");
  if (!(pinhole_radius > 0.0)) throw Error(ErrorCode::Configuration, "reference.pinhole_radius must be > 0");
  if (render_camera) {
    camera.validate();
    if (events_per_frame < 1) throw Error(ErrorCode::Configuration, "camera.events_per_frame must be >= 1");
  }
}

SimConfig parse_config(const std::string& text) {
  SimConfig cfg;
  cfg.source_text = text;
  bool focal_given = false;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Configuration, "config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      std::string msg = "unknown config key '" + key + "'; valid keys:";
      for (const auto& k : keys) msg += " " + k;
      throw Error(ErrorCode::Configuration, msg);
    }
    cfg.entries[key] = val;

    if (key == "mask.kind") {
      if (val == "flat") cfg.mask.kind = MaskKind::Flat;
      else if (val == "quadratic1d") cfg.mask.kind = MaskKind::Quadratic1D;
      else if (val == "quadratic2d") cfg.mask.kind = MaskKind::Quadratic2D;
      else if (val == "spiral") cfg.mask.kind = MaskKind::Spiral;
      else throw Error(ErrorCode::Configuration, "mask.kind must be flat|quadratic1d|quadratic2d|spiral");
    } else if (key == "mask.focal_mm") {
      cfg.mask.focal_length = number(key, val) * 1e-3;
      focal_given = true;
    } else if (key == "mask.charge") {
      cfg.mask.charge = integer(key, val);
    } else if (key == "mask.wavelength_nm") {
      cfg.mask.wavelength = number(key, val) * 1e-9;
    } else if (key == "mask.center_x_um") {
      cfg.mask.center_x = number(key, val) * 1e-6;
    } else if (key == "mask.center_y_um") {
      cfg.mask.center_y = number(key, val) * 1e-6;
    } else if (key == "grid.size") {
      cfg.grid.width = cfg.grid.height = integer(key, val);
    } else if (key == "grid.pitch_um") {
      cfg.grid.pitch = number(key, val) * 1e-6;
    } else if (key == "tilt.a1") {
      cfg.tilt.a1 = number(key, val) * 1e3;
    } else if (key == "tilt.a2") {
      cfg.tilt.a2 = number(key, val) * 1e3;
    } else if (key == "tilt.phi0") {
      cfg.tilt.phi0 = number(key, val);
    } else if (key == "noise.dark_hz") {
      cfg.noise.dark_rate = number(key, val);
    } else if (key == "noise.accidental_hz") {
      cfg.noise.accidental_rate = number(key, val);
    } else if (key == "noise.signal_hz") {
      cfg.noise.signal_rate = number(key, val);
    } else if (key == "noise.accidental_shape") {
      if (val == "signal") cfg.noise.accidental_shape = AccidentalShape::SignalShaped;
      else if (val == "uniform") cfg.noise.accidental_shape = AccidentalShape::Uniform;
      else throw Error(ErrorCode::Configuration, "noise.accidental_shape must be signal|uniform");
    } else if (key == "beam.waist_um") {
      cfg.waist = number(key, val) * 1e-6;
    } else if (key == "reference.mode") {
      if (val == "analytic") cfg.reference_mode = ReferenceMode::Analytic;
      else if (val == "pinhole") cfg.reference_mode = ReferenceMode::Pinhole;
      else throw Error(ErrorCode::Configuration, "reference.mode must be analytic|pinhole");
    } else if (key == "reference.pinhole_offset") {
      const auto [fx, fy] = pair_of(key, val);
      cfg.pinhole_offset_x = fx * 1e3;
      cfg.pinhole_offset_y = fy * 1e3;
    } else if (key == "reference.pinhole_radius") {
      cfg.pinhole_radius = number(key, val) * 1e3;
    } else if (key == "reference.amplitude_ratio") {
      cfg.amplitude_ratio = number(key, val);
    } else if (key == "reference.waist_um") {
      cfg.reference_waist = number(key, val) * 1e-6;
    } else if (key == "camera.render") {
      cfg.render_camera = integer(key, val) != 0;
    } else if (key == "camera.psf_sigma_px") {
      cfg.camera.psf_sigma = number(key, val);
    } else if (key == "camera.gain_mean") {
      cfg.camera.gain_mean = number(key, val);
    } else if (key == "camera.gain_dispersion") {
      cfg.camera.gain_dispersion = number(key, val);
    } else if (key == "camera.events_per_frame") {
      cfg.events_per_frame = integer(key, val);
    } else if (key == "camera.threshold") {
      cfg.detection.threshold = number(key, val);
    } else if (key == "camera.window_radius") {
      cfg.detection.window_radius = integer(key, val);
    }
  }

  if (!focal_given) {
    if (cfg.mask.kind == MaskKind::Quadratic2D) cfg.mask.focal_length = 125e-3;
    if (cfg.mask.kind == MaskKind::Quadratic1D) cfg.mask.focal_length = 58e-3;
  }
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::uint64_t fnv1a64(const std::string& bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace holo
