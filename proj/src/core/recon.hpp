#pragma once

#include <optional>
#include <string>

#include "core/field.hpp"
#include "core/photonsim.hpp"

namespace holo {

// Centered spectrum: index (width/2, height/2) holds DC. k in rad/m.
struct SpectrumMap {
  GridSpec grid;
  ComplexMap values;

  double dk_x() const noexcept { return kTwoPi / (grid.width * grid.pitch); }
  double dk_y() const noexcept { return kTwoPi / (grid.height * grid.pitch); }
  double kx_at(int i) const noexcept { return (i - grid.width / 2) * dk_x(); }
  double ky_at(int j) const noexcept { return (j - grid.height / 2) * dk_y(); }
};

struct KVector {
  double kx = 0.0;
  double ky = 0.0;
};

struct SidebandSelection {
  KVector center;
  double radius = 0.0;       // rad/m
  double taper_width = 0.0;  // rad/m, 0 = hard edge

  void validate(const SpectrumMap& spectrum) const;
};

struct WrappedPhase {
  RealMap phase;  // (-pi, pi]
  Mask valid;
};

struct ReconParams {
  double dc_exclusion_radius = 0.0;  // rad/m; 0 = 10% of Nyquist
  double radius_fraction = 0.5;      // sideband radius / |center|
  double taper_fraction = 0.1;       // taper width / radius
  double amplitude_floor = 0.05;     // validity: |p| >= floor * max|p|
  bool conjugate = false;            // use the mirror of the located peak
  std::optional<SidebandSelection> sideband;  // skips locate_sideband
  std::optional<Mask> fixed_validity;         // overrides the amplitude floor
};

struct ReconstructionResult {
  GridSpec grid;
  RealMap phase;              // unwrapped, reference-subtracted; NaN outside validity
  RealMap cross_amplitude;    // |p| = |psi_u| |psi_r|
  RealMap dc_intensity;       // |psi_u|^2 + |psi_r|^2 from the DC band, same filter radius
  Mask validity;
  SidebandSelection sideband;
  std::string offset_convention;
};

SpectrumMap forward_fft(const RealMap& image, const GridSpec& grid);
SpectrumMap forward_fft(const Interferogram& interferogram);

KVector locate_sideband(const SpectrumMap& spectrum, double dc_exclusion_radius);

SidebandSelection default_selection(const KVector& center, const ReconParams& params);

// Disk filter with raised-cosine edge around `center`; no demodulation.
ComplexField band_filter(const SpectrumMap& spectrum, const KVector& center, double radius,
                         double taper_width);

// Disk filter at sel.center, shift that bin to DC, inverse FFT.
ComplexField extract_sideband(const SpectrumMap& spectrum, const SidebandSelection& sel);

WrappedPhase wrapped_phase(const ComplexField& p, double amplitude_floor = 0.05);

RealMap unwrap_2d(const RealMap& wrapped, const RealMap& quality, const Mask& validity);

// Removes the reference phase (or a fitted plane), then zeroes the value at the
// amplitude-weighted centroid. Pixels outside validity become NaN.
RealMap subtract_reference(const RealMap& phase, const RealMap* ref_phase, const Mask& validity,
                           const RealMap& amplitude);

ReconstructionResult reconstruct(const Interferogram& interferogram, const Interferogram* reference,
                                 const ReconParams& params = {});
ReconstructionResult reconstruct(const RealMap& image, const RealMap* reference, const GridSpec& grid,
                                 const ReconParams& params = {});

}  // namespace holo
