#include "core/recon.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "core/fft.hpp"

namespace holo {

namespace {

template <typename Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

double taper_weight(double d, double radius, double taper) {
  if (d <= radius) return 1.0;
  if (taper <= 0.0 || d >= radius + taper) return 0.0;
  return 0.5 * (1.0 + std::cos(kPi * (d - radius) / taper));
}

ComplexField inverse_centered(ComplexMap centered, const GridSpec& grid) {
  ComplexMap v = fft::ifftshift(centered);
  fft::transform_2d(v, fft::Direction::Inverse);
  ComplexField out(grid);
  out.values = std::move(v);
  return out;
}

ComplexMap masked(const SpectrumMap& s, const KVector& c, double radius, double taper) {
  ComplexMap out(s.values.width(), s.values.height());
  for (int j = 0; j < s.values.height(); ++j) {
    const double dy = s.ky_at(j) - c.ky;
    for (int i = 0; i < s.values.width(); ++i) {
      const double dx = s.kx_at(i) - c.kx;
      const double wgt = taper_weight(std::hypot(dx, dy), radius, taper);
      if (wgt > 0.0) out(i, j) = s.values(i, j) * wgt;
    }
  }
  return out;
}

}  // namespace

void SidebandSelection::validate(const SpectrumMap& spectrum) const {
  if (!(radius > 0.0)) throw Error(ErrorCode::Selection, "sideband radius must be positive");
  if (taper_width < 0.0) throw Error(ErrorCode::Selection, "taper width must be nonnegative");
  const double dist = std::hypot(center.kx, center.ky);
  if (dist == 0.0) throw Error(ErrorCode::Selection, "sideband center must differ from DC");
  // The DC pixel sits at k = 0 exactly; it must fall outside the tapered disk.
  if (dist <= radius + taper_width)
    throw Error(ErrorCode::Selection, "sideband mask overlaps the DC peak pixel");
  const double kx_max = spectrum.dk_x() * spectrum.grid.width / 2;
  const double ky_max = spectrum.dk_y() * spectrum.grid.height / 2;
  if (std::abs(center.kx) > kx_max || std::abs(center.ky) > ky_max)
    throw Error(ErrorCode::Selection, "sideband center lies outside the spectrum");
}

SpectrumMap forward_fft(const RealMap& image, const GridSpec& grid) {
  grid.validate();
  if (image.width() != grid.width || image.height() != grid.height)
    throw Error(ErrorCode::Dimension, "image does not match its grid");
  ComplexMap v(image.width(), image.height());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = image[k];
  fft::transform_2d(v, fft::Direction::Forward);
  return {grid, fft::fftshift(v)};
}

SpectrumMap forward_fft(const Interferogram& interferogram) {
  RealMap img(interferogram.counts.width(), interferogram.counts.height());
  for (std::size_t k = 0; k < img.size(); ++k) img[k] = interferogram.counts[k];
  return forward_fft(img, interferogram.grid);
}

KVector locate_sideband(const SpectrumMap& spectrum, double dc_exclusion_radius) {
  if (!(dc_exclusion_radius > 0.0))
    throw Error(ErrorCode::InvalidArgument, "dc_exclusion_radius must be positive");
  const int w = spectrum.values.width();
  const int h = spectrum.values.height();
  std::vector<double> outside;
  outside.reserve(spectrum.values.size());
  double best = -1.0;
  int bi = -1, bj = -1;
  for (int i = 0; i < w; ++i) {  // kx ascending, then ky: first hit wins ties
    const double kx = spectrum.kx_at(i);
    for (int j = 0; j < h; ++j) {
      const double ky = spectrum.ky_at(j);
      if (std::hypot(kx, ky) <= dc_exclusion_radius) continue;
      const double mag = std::abs(spectrum.values(i, j));
      outside.push_back(mag);
      const bool half = kx > 0.0 || (kx == 0.0 && ky > 0.0);
      if (half && mag > best) {
        best = mag;
        bi = i;
        bj = j;
      }
    }
  }
  if (bi < 0 || outside.empty())
    throw Error(ErrorCode::NoSideband, "DC exclusion covers the whole spectrum");
  auto mid = outside.begin() + static_cast<std::ptrdiff_t>(outside.size() / 2);
  std::nth_element(outside.begin(), mid, outside.end());
  const double median = *mid;
  const double dc = std::abs(spectrum.values(w / 2, h / 2));
  // Shot noise alone gives Rayleigh magnitudes whose maximum over M bins sits
  // near median * sqrt(ln M / ln 2); demand a margin of sqrt(2) on that.
  const double m_bins = static_cast<double>(outside.size());
  const double factor = std::max(3.0, std::sqrt(2.0 * std::log(std::max(m_bins, 2.0)) / std::log(2.0)));
  if (best <= factor * median || best <= 1e-4 * dc)
    throw Error(ErrorCode::NoSideband,
                "no sideband above the noise floor; the carrier tilt is too small or one arm is dark");
  return {spectrum.kx_at(bi), spectrum.ky_at(bj)};
}

SidebandSelection default_selection(const KVector& center, const ReconParams& params) {
  SidebandSelection sel;
  sel.center = center;
  sel.radius = params.radius_fraction * std::hypot(center.kx, center.ky);
  sel.taper_width = params.taper_fraction * sel.radius;
  return sel;
}

ComplexField band_filter(const SpectrumMap& spectrum, const KVector& center, double radius,
                         double taper_width) {
  return inverse_centered(masked(spectrum, center, radius, taper_width), spectrum.grid);
}

ComplexField extract_sideband(const SpectrumMap& spectrum, const SidebandSelection& sel) {
  sel.validate(spectrum);
  const ComplexMap m = masked(spectrum, sel.center, sel.radius, sel.taper_width);
  const int w = m.width();
  const int h = m.height();
  const int sx = static_cast<int>(std::lround(sel.center.kx / spectrum.dk_x()));
  const int sy = static_cast<int>(std::lround(sel.center.ky / spectrum.dk_y()));
  ComplexMap shifted(w, h);
  for (int j = 0; j < h; ++j) {
    const int jj = ((j - sy) % h + h) % h;
    for (int i = 0; i < w; ++i) shifted(((i - sx) % w + w) % w, jj) = m(i, j);
  }
  return inverse_centered(std::move(shifted), spectrum.grid);
}

WrappedPhase wrapped_phase(const ComplexField& p, double amplitude_floor) {
  const int w = p.values.width();
  const int h = p.values.height();
  WrappedPhase out{RealMap(w, h), Mask(w, h)};
  double peak = 0.0;
  for (const auto& v : p.values) peak = std::max(peak, std::abs(v));
  const double floor = amplitude_floor * peak;
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    double a = std::arg(p.values[k]);
    if (a <= -kPi) a = kPi;
    out.phase[k] = a;
    out.valid[k] = (peak > 0.0 && std::abs(p.values[k]) >= floor) ? 1 : 0;
  }
  return out;
}

RealMap unwrap_2d(const RealMap& wrapped, const RealMap& quality, const Mask& validity) {
  require_same_shape(wrapped, quality, "unwrap_2d");
  require_same_shape(wrapped, validity, "unwrap_2d");
  const int w = wrapped.width();
  const int h = wrapped.height();
  const std::size_t n = wrapped.size();

  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < n; ++k)
    if (validity[k]) order.push_back(k);
  if (order.empty()) throw Error(ErrorCode::EmptyValidity, "unwrap_2d: no valid pixel");
  // Seeds for disconnected regions: highest quality first, index breaks ties.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return quality[a] > quality[b]; });

  RealMap out = wrapped;
  std::vector<std::uint8_t> done(n, 0);
  using Entry = std::pair<double, std::size_t>;
  auto cmp = [](const Entry& a, const Entry& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);

  auto push_neighbors = [&](std::size_t k) {
    const int i = static_cast<int>(k % w), j = static_cast<int>(k / w);
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      const int ii = i + di[d], jj = j + dj[d];
      if (ii < 0 || jj < 0 || ii >= w || jj >= h) continue;
      const std::size_t q = static_cast<std::size_t>(jj) * w + ii;
      if (validity[q] && !done[q]) heap.push({quality[q], q});
    }
  };

  for (std::size_t seed : order) {
    if (done[seed]) continue;
    done[seed] = 1;
    push_neighbors(seed);
    while (!heap.empty()) {
      const std::size_t k = heap.top().second;
      heap.pop();
      if (done[k]) continue;
      const int i = static_cast<int>(k % w), j = static_cast<int>(k / w);
      const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
      std::size_t anchor = n;
      for (int d = 0; d < 4; ++d) {
        const int ii = i + di[d], jj = j + dj[d];
        if (ii < 0 || jj < 0 || ii >= w || jj >= h) continue;
        const std::size_t q = static_cast<std::size_t>(jj) * w + ii;
        if (!done[q]) continue;
        if (anchor == n || quality[q] > quality[anchor] || (quality[q] == quality[anchor] && q < anchor))
          anchor = q;
      }
      const double turns = std::round((out[anchor] - wrapped[k]) / kTwoPi);
      out[k] = wrapped[k] + kTwoPi * turns;
      done[k] = 1;
      push_neighbors(k);
    }
  }
  return out;
}

RealMap subtract_reference(const RealMap& phase, const RealMap* ref_phase, const Mask& validity,
                           const RealMap& amplitude) {
  require_same_shape(phase, validity, "subtract_reference");
  require_same_shape(phase, amplitude, "subtract_reference");
  if (ref_phase) require_same_shape(phase, *ref_phase, "subtract_reference");
  const int w = phase.width();
  const int h = phase.height();

  RealMap out(w, h, std::numeric_limits<double>::quiet_NaN());
  std::size_t n_valid = 0;
  for (std::size_t k = 0; k < phase.size(); ++k) n_valid += validity[k] ? 1 : 0;

  if (ref_phase) {
    if (n_valid == 0) throw Error(ErrorCode::EmptyValidity, "subtract_reference: no valid pixel");
    for (std::size_t k = 0; k < phase.size(); ++k)
      if (validity[k]) out[k] = phase[k] - (*ref_phase)[k];
  } else {
    if (n_valid < 3)
      throw Error(ErrorCode::EmptyValidity, "plane fit needs at least 3 valid pixels");
    // Least squares for c0 + c1 u + c2 v with centered pixel coordinates.
    double a[3][3] = {}, b[3] = {};
    const double cu = w / 2.0, cv = h / 2.0;
    for (int j = 0; j < h; ++j)
      for (int i = 0; i < w; ++i) {
        if (!validity(i, j)) continue;
        const double g[3] = {1.0, i - cu, j - cv};
        for (int r = 0; r < 3; ++r) {
          b[r] += g[r] * phase(i, j);
          for (int c = 0; c < 3; ++c) a[r][c] += g[r] * g[c];
        }
      }
    // Cramer's rule on the 3x3 normal equations.
    auto det3 = [](const double m[3][3]) {
      return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
             m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
             m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const double d = det3(a);
    if (!(std::abs(d) > 1e-12 * std::abs(a[0][0] * a[1][1] * a[2][2])))
      throw Error(ErrorCode::EmptyValidity, "plane fit is degenerate: valid pixels are collinear");
    double c[3];
    for (int col = 0; col < 3; ++col) {
      double m[3][3];
      for (int r = 0; r < 3; ++r)
        for (int q = 0; q < 3; ++q) m[r][q] = q == col ? b[r] : a[r][q];
      c[col] = det3(m) / d;
    }
    for (int j = 0; j < h; ++j)
      for (int i = 0; i < w; ++i)
        if (validity(i, j)) out(i, j) = phase(i, j) - (c[0] + c[1] * (i - cu) + c[2] * (j - cv));
  }

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i)
      if (validity(i, j)) {
        const double a = amplitude(i, j);
        sw += a, sx += a * i, sy += a * j;
      }
  double cx = w / 2.0, cy = h / 2.0;
  if (sw > 0.0) cx = sx / sw, cy = sy / sw;
  std::size_t anchor = phase.size();
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      if (!validity(i, j)) continue;
      const double d2 = (i - cx) * (i - cx) + (j - cy) * (j - cy);
      if (d2 < best) best = d2, anchor = static_cast<std::size_t>(j) * w + i;
    }
  const double offset = out[anchor];
  for (std::size_t k = 0; k < out.size(); ++k)
    if (validity[k]) out[k] -= offset;
  return out;
}

ReconstructionResult reconstruct(const RealMap& image, const RealMap* reference, const GridSpec& grid,
                                 const ReconParams& params) {
  const SpectrumMap spectrum = staged("forward_fft", [&] { return forward_fft(image, grid); });

  SidebandSelection sel;
  if (params.sideband) {
    sel = *params.sideband;
  } else {
    sel = staged("locate_sideband", [&] {
      const double nyquist = kPi / grid.pitch;
      const double excl = params.dc_exclusion_radius > 0.0 ? params.dc_exclusion_radius : 0.1 * nyquist;
      KVector c = locate_sideband(spectrum, excl);
      if (params.conjugate) c = {-c.kx, -c.ky};
      return default_selection(c, params);
    });
  }

  const ComplexField p = staged("extract_sideband", [&] { return extract_sideband(spectrum, sel); });
  const WrappedPhase wp = staged("wrapped_phase", [&] { return wrapped_phase(p, params.amplitude_floor); });

  ReconstructionResult res;
  res.grid = grid;
  res.sideband = sel;
  res.cross_amplitude = RealMap(grid.width, grid.height);
  for (std::size_t k = 0; k < p.values.size(); ++k) res.cross_amplitude[k] = std::abs(p.values[k]);
  {
    const ComplexField dc = band_filter(spectrum, {0.0, 0.0}, sel.radius, sel.taper_width);
    res.dc_intensity = RealMap(grid.width, grid.height);
    for (std::size_t k = 0; k < dc.values.size(); ++k) res.dc_intensity[k] = dc.values[k].real();
  }

  Mask validity = wp.valid;
  if (params.fixed_validity) {
    require_same_shape(*params.fixed_validity, validity, "reconstruct");
    validity = *params.fixed_validity;
  }

  std::optional<WrappedPhase> ref_wp;
  RealMap ref_quality;
  if (reference) {
    const SpectrumMap ref_spec =
        staged("reference.forward_fft", [&] { return forward_fft(*reference, grid); });
    const ComplexField ref_p =
        staged("reference.extract_sideband", [&] { return extract_sideband(ref_spec, sel); });
    ref_wp = wrapped_phase(ref_p, params.amplitude_floor);
    ref_quality = RealMap(grid.width, grid.height);
    for (std::size_t k = 0; k < ref_p.values.size(); ++k) ref_quality[k] = std::abs(ref_p.values[k]);
    if (!params.fixed_validity)
      for (std::size_t k = 0; k < validity.size(); ++k) validity[k] = validity[k] && ref_wp->valid[k];
  }
  res.validity = validity;

  const RealMap unwrapped =
      staged("unwrap_2d", [&] { return unwrap_2d(wp.phase, res.cross_amplitude, validity); });
  if (reference) {
    const RealMap ref_unwrapped =
        staged("reference.unwrap_2d", [&] { return unwrap_2d(ref_wp->phase, ref_quality, validity); });
    res.phase = staged("subtract_reference", [&] {
      return subtract_reference(unwrapped, &ref_unwrapped, validity, res.cross_amplitude);
    });
    res.offset_convention = "reference run subtracted; zero at amplitude-weighted centroid";
  } else {
    res.phase = staged("subtract_reference", [&] {
      return subtract_reference(unwrapped, nullptr, validity, res.cross_amplitude);
    });
    res.offset_convention = "least-squares plane removed; zero at amplitude-weighted centroid";
  }
  return res;
}

ReconstructionResult reconstruct(const Interferogram& interferogram, const Interferogram* reference,
                                 const ReconParams& params) {
  auto to_real = [](const Interferogram& in) {
    RealMap img(in.counts.width(), in.counts.height());
    for (std::size_t k = 0; k < img.size(); ++k) img[k] = in.counts[k];
    return img;
  };
  const RealMap img = to_real(interferogram);
  if (reference) {
    if (!reference->grid.same_shape(interferogram.grid))
      throw Error(ErrorCode::Dimension, "reference interferogram grid differs", "reconstruct");
    const RealMap ref = to_real(*reference);
    return reconstruct(img, &ref, interferogram.grid, params);
  }
  return reconstruct(img, nullptr, interferogram.grid, params);
}

}  // namespace holo
