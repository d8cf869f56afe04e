#include "core/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace holo {

namespace {

constexpr int kBootstrapBlocks = 16;

double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  return a <= -kPi ? a + kTwoPi : a;
}

Interferogram poisson_resample(const Interferogram& in, std::mt19937_64 rng) {
  Interferogram out{in.grid, Array2D<std::uint32_t>(in.counts.width(), in.counts.height()), 0};
  for (std::size_t k = 0; k < in.counts.size(); ++k) {
    const auto c = in.counts[k];
    if (c == 0) continue;
    out.counts[k] = std::poisson_distribution<std::uint32_t>(static_cast<double>(c))(rng);
  }
  return out;
}

// Solves the normal equations of a small dense least-squares problem in place.
// Returns false when the system is singular.
bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (!(std::abs(a[piv][col]) > 1e-12)) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return true;
}

}  // namespace

double circular_std_from_resultant(double r) {
  if (r >= 1.0) return 0.0;
  if (!(r > 0.0)) return kCircularStdBound;
  return std::min(std::sqrt(-2.0 * std::log(r)), kCircularStdBound);
}

CircularStats circular_stats(const std::vector<double>& angles) {
  CircularStats s;
  if (angles.empty()) return s;
  double c = 0.0, sn = 0.0;
  for (double a : angles) c += std::cos(a), sn += std::sin(a);
  const double n = static_cast<double>(angles.size());
  s.mean = std::atan2(sn, c);
  s.resultant = std::hypot(c, sn) / n;
  s.std = circular_std_from_resultant(s.resultant);
  return s;
}

UncertaintyMaps bootstrap(const Interferogram& interferogram, const Interferogram* reference,
                          const ReconParams& params, const BootstrapOptions& options) {
  if (options.n_resamples < 2) throw Error(ErrorCode::InvalidArgument, "bootstrap needs n_resamples >= 2");

  const ReconstructionResult base = reconstruct(interferogram, reference, params);
  ReconParams fixed = params;
  fixed.sideband = base.sideband;
  fixed.fixed_validity = base.validity;

  std::vector<std::size_t> pixels;
  for (std::size_t k = 0; k < base.validity.size(); ++k)
    if (base.validity[k]) pixels.push_back(k);
  const std::size_t m = pixels.size();

  const int n = options.n_resamples;
  const int blocks = std::min(kBootstrapBlocks, n);
  struct Partial {
    std::vector<double> c, s, lo, hi;
    int ok = 0;
    int failed = 0;
  };
  std::vector<Partial> partial(blocks);

  parallel_for(
      blocks,
      [&](int b) {
        Partial& acc = partial[b];
        acc.c.assign(m, 0.0);
        acc.s.assign(m, 0.0);
        acc.lo.assign(m, std::numeric_limits<double>::infinity());
        acc.hi.assign(m, -std::numeric_limits<double>::infinity());
        const int r0 = static_cast<int>(static_cast<long long>(n) * b / blocks);
        const int r1 = static_cast<int>(static_cast<long long>(n) * (b + 1) / blocks);
        for (int r = r0; r < r1; ++r) {
          const auto key = static_cast<std::uint64_t>(options.same_draw_every_resample ? 0 : r);
          const Interferogram draw = poisson_resample(interferogram, substream(options.seed, streams::kBootstrap, key));
          std::optional<Interferogram> ref_draw;
          if (reference)
            ref_draw = poisson_resample(*reference, substream(options.seed, streams::kBootstrapRef, key));
          try {
            const auto res = reconstruct(draw, ref_draw ? &*ref_draw : nullptr, fixed);
            for (std::size_t q = 0; q < m; ++q) {
              const double d = res.phase[pixels[q]] - base.phase[pixels[q]];
              acc.c[q] += std::cos(d);
              acc.s[q] += std::sin(d);
              acc.lo[q] = std::min(acc.lo[q], d);
              acc.hi[q] = std::max(acc.hi[q], d);
            }
            ++acc.ok;
          } catch (const Error&) {
            ++acc.failed;
          }
        }
      },
      options.max_workers);

  std::vector<double> c(m, 0.0), s(m, 0.0);
  std::vector<double> lo(m, std::numeric_limits<double>::infinity());
  std::vector<double> hi(m, -std::numeric_limits<double>::infinity());
  int ok = 0, failed = 0;
  for (const auto& p : partial) {
    if (p.ok == 0) continue;
    for (std::size_t q = 0; q < m; ++q) {
      c[q] += p.c[q], s[q] += p.s[q];
      lo[q] = std::min(lo[q], p.lo[q]);
      hi[q] = std::max(hi[q], p.hi[q]);
    }
    ok += p.ok;
    failed += p.failed;
  }
  if (failed * 100 > n || ok < 2)
    throw Error(ErrorCode::Pipeline,
                "bootstrap aborted: " + std::to_string(failed) + " of " + std::to_string(n) +
                    " resampled reconstructions failed",
                "bootstrap");

  const int w = base.grid.width, h = base.grid.height;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  UncertaintyMaps out{RealMap(w, h, nan), RealMap(w, h, nan), base.validity, n, options.seed, failed};
  for (std::size_t q = 0; q < m; ++q) {
    const std::size_t k = pixels[q];
    if (lo[q] == hi[q]) {
      // every resample agreed; the resultant would only differ from 1 by rounding
      out.mean_phase[k] = base.phase[k] + lo[q];
      out.std_phase[k] = 0.0;
      continue;
    }
    const double r = std::hypot(c[q], s[q]) / ok;
    out.mean_phase[k] = base.phase[k] + std::atan2(s[q], c[q]);
    out.std_phase[k] = circular_std_from_resultant(r);
  }
  return out;
}

VisibilityResult visibility(const ReconstructionResult& recon, const RealMap& dc_intensity) {
  require_same_shape(recon.cross_amplitude, dc_intensity, "visibility");
  require_same_shape(recon.cross_amplitude, recon.validity, "visibility");
  double dc_max = 0.0;
  for (double v : dc_intensity) dc_max = std::max(dc_max, v);
  const double floor = 1e-2 * dc_max;

  VisibilityResult out{RealMap(dc_intensity.width(), dc_intensity.height()), 0.0, 0.0};
  std::vector<double> inside;
  std::size_t clipped = 0;
  for (std::size_t k = 0; k < dc_intensity.size(); ++k) {
    if (!recon.validity[k] || !(dc_intensity[k] > floor)) continue;
    double v = 2.0 * recon.cross_amplitude[k] / dc_intensity[k];
    if (v > 1.0 + 1e-9) ++clipped;
    v = std::clamp(v, 0.0, 1.0);
    out.map[k] = v;
    inside.push_back(v);
  }
  if (inside.empty()) throw Error(ErrorCode::EmptyValidity, "visibility: empty validity region");
  const std::size_t half = inside.size() / 2;
  std::nth_element(inside.begin(), inside.begin() + half, inside.end());
  double med = inside[half];
  if (inside.size() % 2 == 0) {
    const double lower = *std::max_element(inside.begin(), inside.begin() + half);
    med = 0.5 * (med + lower);
  }
  out.summary = med;
  out.clip_fraction = static_cast<double>(clipped) / static_cast<double>(inside.size());
  return out;
}

std::pair<int, int> middle_band(int extent, int count) {
  const int b = extent / 2 - count / 2;
  return {b, b + count};
}

ProfileResult band_average(const RealMap& phase, const RealMap* std, const GridSpec& grid, BandAxis axis,
                           int begin, int end) {
  if (std) require_same_shape(phase, *std, "band_average");
  const int across_extent = axis == BandAxis::Columns ? phase.width() : phase.height();
  const int along_extent = axis == BandAxis::Columns ? phase.height() : phase.width();
  if (begin < 0 || end > across_extent || begin >= end)
    throw Error(ErrorCode::InvalidArgument, "band range is empty or outside the grid");

  const int n = end - begin;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ProfileResult out;
  for (int a = 0; a < along_extent; ++a) {
    double sum = 0.0, sum2 = 0.0, var = 0.0;
    bool ok = true;
    for (int b = begin; b < end; ++b) {
      const int i = axis == BandAxis::Columns ? b : a;
      const int j = axis == BandAxis::Columns ? a : b;
      const double v = phase(i, j);
      if (!std::isfinite(v)) {
        ok = false;
        break;
      }
      sum += v;
      sum2 += v * v;
      if (std) {
        const double s = (*std)(i, j);
        if (!std::isfinite(s)) {
          ok = false;
          break;
        }
        var += s * s;
      }
    }
    out.abscissa.push_back(axis == BandAxis::Columns ? grid.y_at(a) : grid.x_at(a));
    out.valid.push_back(ok ? 1 : 0);
    if (!ok) {
      out.values.push_back(nan);
      out.errors.push_back(nan);
      out.pixel_std.push_back(nan);
      out.spread.push_back(nan);
      continue;
    }
    const double mean = sum / n;
    const double pix = std::sqrt(var / n);
    out.values.push_back(mean);
    out.pixel_std.push_back(pix);
    out.errors.push_back(pix / std::sqrt(static_cast<double>(n)));
    out.spread.push_back(std::sqrt(std::max(sum2 / n - mean * mean, 0.0)));
  }
  return out;
}

ProfileResult column_average(const RealMap& phase, const RealMap* std, const GridSpec& grid, int begin,
                             int end) {
  return band_average(phase, std, grid, BandAxis::Columns, begin, end);
}

ProfileResult column_average(const RealMap& phase, const RealMap* std, const GridSpec& grid) {
  const auto [b, e] = middle_band(phase.width());
  return column_average(phase, std, grid, b, e);
}

ProfileResult azimuthal_profile(const RealMap& phase, double center_x, double center_y, double r_inner,
                                double r_outer, int n_bins) {
  if (!(r_inner > 0.0) || !(r_outer > r_inner))
    throw Error(ErrorCode::InvalidArgument, "azimuthal_profile needs 0 < r_inner < r_outer");
  if (n_bins < 8) throw Error(ErrorCode::InvalidArgument, "azimuthal_profile needs at least 8 bins");

  struct Sample {
    int bin;
    double alpha, value;
  };
  std::vector<Sample> samples;
  std::vector<double> c(n_bins, 0.0), s(n_bins, 0.0);
  std::vector<int> count(n_bins, 0);
  const double width = kTwoPi / n_bins;
  for (int j = 0; j < phase.height(); ++j)
    for (int i = 0; i < phase.width(); ++i) {
      const double v = phase(i, j);
      if (!std::isfinite(v)) continue;
      const double dx = i - center_x, dy = j - center_y;
      const double r = std::hypot(dx, dy);
      if (r < r_inner || r > r_outer) continue;
      const double alpha = std::atan2(dy, dx);
      const int b = std::clamp(static_cast<int>(std::floor((alpha + kPi) / width)), 0, n_bins - 1);
      c[b] += std::cos(v);
      s[b] += std::sin(v);
      ++count[b];
      samples.push_back({b, alpha, v});
    }

  // Each bin's value is its circular mean refined by the mean deviation from
  // it, and its abscissa is the mean pixel angle, so a pure l*alpha field maps
  // onto an exact line.
  std::vector<double> center(n_bins), dev(n_bins, 0.0), mean_alpha(n_bins, 0.0);
  for (int b = 0; b < n_bins; ++b) center[b] = std::atan2(s[b], c[b]);
  for (const auto& q : samples) {
    dev[q.bin] += wrap_angle(q.value - center[q.bin]);
    mean_alpha[q.bin] += q.alpha;
  }

  ProfileResult out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double prev = nan;
  for (int b = 0; b < n_bins; ++b) {
    if (count[b] == 0) {
      out.abscissa.push_back(-kPi + (b + 0.5) * width);
      out.values.push_back(nan);
      out.errors.push_back(nan);
      out.pixel_std.push_back(nan);
      out.spread.push_back(nan);
      out.valid.push_back(0);
      continue;
    }
    out.abscissa.push_back(mean_alpha[b] / count[b]);
    double mean = center[b] + dev[b] / count[b];
    if (std::isfinite(prev)) mean = prev + wrap_angle(mean - prev);
    prev = mean;
    const double spread = circular_std_from_resultant(std::hypot(c[b], s[b]) / count[b]);
    out.values.push_back(mean);
    out.spread.push_back(spread);
    out.pixel_std.push_back(spread);
    out.errors.push_back(spread / std::sqrt(static_cast<double>(count[b])));
    out.valid.push_back(1);
  }

  // slope * alpha + c0 + a cos(alpha) + b sin(alpha); the harmonic absorbs a
  // plane through the center.
  constexpr int np = 4;
  std::vector<std::vector<double>> ata(np, std::vector<double>(np, 0.0));
  std::vector<double> atb(np, 0.0);
  int used = 0;
  for (int b = 0; b < n_bins; ++b) {
    if (!out.valid[b]) continue;
    const double a = out.abscissa[b];
    const double g[np] = {a, 1.0, std::cos(a), std::sin(a)};
    for (int r = 0; r < np; ++r) {
      atb[r] += g[r] * out.values[b];
      for (int q = 0; q < np; ++q) ata[r][q] += g[r] * g[q];
    }
    ++used;
  }
  std::vector<double> x;
  if (used > np && solve_dense(ata, atb, x)) {
    double ssr = 0.0;
    for (int b = 0; b < n_bins; ++b) {
      if (!out.valid[b]) continue;
      const double a = out.abscissa[b];
      const double r = out.values[b] - (x[0] * a + x[1] + x[2] * std::cos(a) + x[3] * std::sin(a));
      ssr += r * r;
    }
    // Variance of the slope: sigma^2 * (A^T A)^-1 [0][0].
    std::vector<double> e0(np, 0.0), col;
    e0[0] = 1.0;
    solve_dense(ata, e0, col);
    const double sigma2 = ssr / (used - np);
    out.fit = LinearFit{x[0], x[1], std::sqrt(ssr / used), std::sqrt(std::max(sigma2 * col[0], 0.0))};
  }
  return out;
}

TheoryComparison compare_theory(const ProfileResult& profile, const PhaseMask& model, BandAxis axis,
                                double across) {
  model.validate();
  std::vector<double> diff;
  for (std::size_t k = 0; k < profile.values.size(); ++k) {
    if (k < profile.valid.size() && !profile.valid[k]) continue;
    if (!std::isfinite(profile.values[k])) continue;
    const double a = profile.abscissa[k];
    const double theory = axis == BandAxis::Columns ? model.phase_at(across, a) : model.phase_at(a, across);
    diff.push_back(profile.values[k] - theory);
  }
  TheoryComparison out;
  out.n_points = static_cast<int>(diff.size());
  if (diff.empty()) return out;
  double mean = 0.0;
  for (double d : diff) mean += d;
  mean /= static_cast<double>(diff.size());
  double ss = 0.0, mx = 0.0;
  for (double d : diff) {
    ss += (d - mean) * (d - mean);
    mx = std::max(mx, std::abs(d - mean));
  }
  out.offset_fitted = mean;
  out.rms_error = std::sqrt(ss / static_cast<double>(diff.size()));
  out.max_error = mx;
  return out;
}

}  // namespace holo
