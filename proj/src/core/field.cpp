#include "core/field.hpp"

#include <cmath>

#include "core/fft.hpp"

namespace holo {

void PhaseMask::validate() const {
  if (!(wavelength > 0.0)) throw Error(ErrorCode::Configuration, "wavelength must be positive");
  if ((kind == MaskKind::Quadratic1D || kind == MaskKind::Quadratic2D) && focal_length == 0.0)
    throw Error(ErrorCode::Configuration, "quadratic mask needs a nonzero focal length");
}

double PhaseMask::phase_at(double x, double y) const noexcept {
  const double dx = x - center_x;
  const double dy = y - center_y;
  switch (kind) {
    case MaskKind::Flat: return 0.0;
    case MaskKind::Quadratic1D: return kPi * dx * dx / (wavelength * focal_length);
    case MaskKind::Quadratic2D: return kPi * (dx * dx + dy * dy) / (wavelength * focal_length);
    case MaskKind::Spiral: return charge * std::atan2(dy, dx);
  }
  return 0.0;
}

void TiltSpec::validate(const GridSpec& grid) const {
  if (std::abs(a1) * grid.pitch >= kPi || std::abs(a2) * grid.pitch >= kPi)
    throw Error(ErrorCode::Configuration,
                "tilt exceeds the fringe Nyquist limit (|a|*pitch must be < pi)");
}

double l2_norm_squared(const ComplexField& f) {
  double s = 0.0;
  for (const auto& v : f.values) s += std::norm(v);
  return s * f.grid.pitch * f.grid.pitch;
}

void normalize(ComplexField& f) {
  const double n2 = l2_norm_squared(f);
  if (!(n2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "cannot normalize a zero field");
  const double s = 1.0 / std::sqrt(n2);
  for (auto& v : f.values) v *= s;
}

ComplexField gaussian_field(const GridSpec& grid, double waist, std::pair<double, double> center) {
  grid.validate();
  if (!(waist > 0.0) || waist < 2.0 * grid.pitch)
    throw Error(ErrorCode::Configuration, "beam waist undersampled: need waist >= 2 * pitch");
  ComplexField f(grid);
  const double inv_w2 = 1.0 / (waist * waist);
  for (int j = 0; j < grid.height; ++j) {
    const double dy = grid.y_at(j) - center.second;
    for (int i = 0; i < grid.width; ++i) {
      const double dx = grid.x_at(i) - center.first;
      f.values(i, j) = std::exp(-(dx * dx + dy * dy) * inv_w2);
    }
  }
  normalize(f);
  return f;
}

RealMap mask_phase(const PhaseMask& mask, const GridSpec& grid) {
  mask.validate();
  RealMap out(grid.width, grid.height);
  for (int j = 0; j < grid.height; ++j)
    for (int i = 0; i < grid.width; ++i) out(i, j) = mask.phase_at(grid.x_at(i), grid.y_at(j));
  return out;
}

ComplexField apply_mask(const ComplexField& field, const PhaseMask& mask) {
  ComplexField out = field;
  if (mask.kind == MaskKind::Flat) {
    mask.validate();
    return out;
  }
  const RealMap phase = mask_phase(mask, field.grid);
  require_same_shape(phase, field.values, "apply_mask");
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] *= std::polar(1.0, phase[k]);
  return out;
}

namespace {

void check_pair(const ComplexField& u, const ComplexField& r) {
  if (!u.grid.same_shape(r.grid) || !u.values.same_shape(r.values))
    throw Error(ErrorCode::Dimension, "unknown and reference fields live on different grids");
}

}  // namespace

RealMap interfere_raw(const ComplexField& unknown, const ComplexField& reference, const TiltSpec& tilt) {
  check_pair(unknown, reference);
  const GridSpec& g = unknown.grid;
  tilt.validate(g);
  RealMap out(g.width, g.height);
  for (int j = 0; j < g.height; ++j) {
    const double y = g.y_at(j);
    for (int i = 0; i < g.width; ++i) {
      const double x = g.x_at(i);
      const cplx carrier = std::polar(1.0, -(tilt.a1 * x + tilt.a2 * y - tilt.phi0));
      out(i, j) = std::norm(unknown.values(i, j) + reference.values(i, j) * carrier);
    }
  }
  return out;
}

IntensityMap interfere(const ComplexField& unknown, const ComplexField& reference, const TiltSpec& tilt) {
  IntensityMap out{unknown.grid, interfere_raw(unknown, reference, tilt)};
  double total = 0.0;
  for (double v : out.values) total += v;
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "interference intensity is identically zero");
  for (double& v : out.values) v /= total;
  return out;
}

ComplexField reference_from_filter(const ComplexField& unknown, double pinhole_radius,
                                   std::pair<double, double> pinhole_offset) {
  if (!(pinhole_radius > 0.0)) throw Error(ErrorCode::Configuration, "pinhole radius must be positive");
  const GridSpec& g = unknown.grid;
  g.validate();

  ComplexMap spec = unknown.values;
  fft::transform_2d(spec, fft::Direction::Forward);
  spec = fft::fftshift(spec);

  const double dfx = 1.0 / (g.width * g.pitch);
  const double dfy = 1.0 / (g.height * g.pitch);
  const double r2 = pinhole_radius * pinhole_radius;
  double kept = 0.0;
  double total = 0.0;
  for (int j = 0; j < g.height; ++j) {
    const double fy = (j - g.height / 2) * dfy - pinhole_offset.second;
    for (int i = 0; i < g.width; ++i) {
      const double fx = (i - g.width / 2) * dfx - pinhole_offset.first;
      total += std::norm(spec(i, j));
      if (fx * fx + fy * fy > r2) {
        spec(i, j) = 0.0;
      } else {
        kept += std::norm(spec(i, j));
      }
    }
  }
  if (!(total > 0.0) || kept <= 1e-6 * total)
    throw Error(ErrorCode::EmptyReference, "pinhole blocks all light: filtered reference is empty");

  spec = fft::ifftshift(spec);
  fft::transform_2d(spec, fft::Direction::Inverse);
  ComplexField out(g);
  out.values = std::move(spec);
  normalize(out);
  return out;
}

double amplitude_ratio_for_visibility(double v) {
  if (!(v > 0.0) || v > 1.0) throw Error(ErrorCode::InvalidArgument, "visibility must lie in (0, 1]");
  return (1.0 - std::sqrt(1.0 - v * v)) / v;
}

}  // namespace holo
