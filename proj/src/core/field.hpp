#pragma once

#include <utility>

#include "core/grid.hpp"

namespace holo {

// Complex probability amplitude sampled on a grid. After normalize(),
// sum |values|^2 * pitch^2 == 1.
struct ComplexField {
  GridSpec grid;
  ComplexMap values;

  ComplexField() = default;
  explicit ComplexField(const GridSpec& g) : grid(g), values(g.width, g.height) {}
};

// Nonnegative intensity on a grid; interfere() returns it normalized to unit sum.
struct IntensityMap {
  GridSpec grid;
  RealMap values;
};

enum class MaskKind { Flat, Quadratic1D, Quadratic2D, Spiral };

struct PhaseMask {
  MaskKind kind = MaskKind::Flat;
  double focal_length = 0.0;    // m, quadratic kinds
  double wavelength = 810e-9;   // m
  int charge = 1;               // spiral order
  double center_x = 0.0;        // m
  double center_y = 0.0;        // m

  void validate() const;
  // Analytic phase at a physical point.
  double phase_at(double x, double y) const noexcept;
};

// Linear phase a1*x + a2*y attached to the reference arm, plus global offset.
struct TiltSpec {
  double a1 = 0.0;  // rad/m
  double a2 = 0.0;  // rad/m
  double phi0 = 0.0;

  void validate(const GridSpec& grid) const;
};

double l2_norm_squared(const ComplexField& f);
void normalize(ComplexField& f);

ComplexField gaussian_field(const GridSpec& grid, double waist, std::pair<double, double> center = {0.0, 0.0});

RealMap mask_phase(const PhaseMask& mask, const GridSpec& grid);
ComplexField apply_mask(const ComplexField& field, const PhaseMask& mask);

// |u + r * exp(-i(a1 x + a2 y - phi0))|^2, not normalized.
RealMap interfere_raw(const ComplexField& unknown, const ComplexField& reference, const TiltSpec& tilt);
// Same, normalized to unit sum.
IntensityMap interfere(const ComplexField& unknown, const ComplexField& reference, const TiltSpec& tilt);

// Low-pass filter through a circular pinhole in the Fourier plane. Radius and
// offset are spatial frequencies in cycles/m. Result is L2-normalized.
ComplexField reference_from_filter(const ComplexField& unknown, double pinhole_radius,
                                   std::pair<double, double> pinhole_offset = {0.0, 0.0});

// Ratio rho = |psi_r| / |psi_u| giving fringe visibility 2 rho / (1 + rho^2) == v.
double amplitude_ratio_for_visibility(double v);

}  // namespace holo
