#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "core/detect.hpp"
#include "core/field.hpp"
#include "core/photonsim.hpp"

namespace holo {

enum class ReferenceMode { Analytic, Pinhole };

// Flat key=value simulation config. Units follow the key suffix.
struct SimConfig {
  PhaseMask mask;  // mask.kind, mask.focal_mm, mask.charge, mask.wavelength_nm, mask.center_*_um
  GridSpec grid;   // grid.size, grid.pitch_um
  TiltSpec tilt{1.2e5, 1.2e5, 0.0};  // tilt.a1, tilt.a2 in rad/mm, tilt.phi0 in rad
  NoiseSpec noise; // noise.*; exposure is derived from the event count
  double waist = 400e-6;
  ReferenceMode reference_mode = ReferenceMode::Analytic;
  double reference_waist = 0.0;      // 0 = same as beam
  double amplitude_ratio = 1.0;      // |psi_r| / |psi_u|
  double pinhole_radius = 0.8e3;     // cycles/m
  double pinhole_offset_x = 0.0;     // cycles/m
  double pinhole_offset_y = 0.0;
  bool render_camera = false;
  FrameParams camera;
  DetectionParams detection;
  int events_per_frame = 1;

  // Raw text and the key/value pairs as given, for manifests.
  std::string source_text;
  std::map<std::string, std::string> entries;

  void validate() const;
};

const std::vector<std::string>& config_keys();

SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::string& bytes) noexcept;

}  // namespace holo
