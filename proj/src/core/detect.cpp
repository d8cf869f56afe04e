#include "core/detect.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "core/parallel.hpp"

namespace holo {

std::vector<FlashCandidate> find_flashes(const RealMap& frame, double threshold, int window_radius,
                                         int frame_index) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  if (window_radius < 1) throw Error(ErrorCode::InvalidArgument, "window_radius must be >= 1");
  const int w = frame.width();
  const int h = frame.height();

  struct Peak {
    double value;
    int i, j;
  };
  std::vector<Peak> peaks;
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const double v = frame(i, j);
      if (v <= threshold) continue;
      bool is_max = true;
      for (int dj = -1; dj <= 1 && is_max; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= w || jj >= h) continue;
          // Plateaus resolve to their first pixel in scan order.
          const double n = frame(ii, jj);
          if (n > v || (n == v && (dj < 0 || (dj == 0 && di < 0)))) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) peaks.push_back({v, i, j});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.value > b.value; });

  std::vector<Peak> kept;
  const double r2 = static_cast<double>(window_radius) * window_radius;
  for (const auto& p : peaks) {
    const bool merged = std::any_of(kept.begin(), kept.end(), [&](const Peak& k) {
      const double dx = p.i - k.i, dy = p.j - k.j;
      return dx * dx + dy * dy < r2;
    });
    if (!merged) kept.push_back(p);
  }
  std::sort(kept.begin(), kept.end(), [](const Peak& a, const Peak& b) {
    return a.j != b.j ? a.j < b.j : a.i < b.i;
  });

  std::vector<FlashCandidate> out;
  out.reserve(kept.size());
  for (const auto& p : kept) {
    FlashCandidate c;
    c.frame_index = frame_index;
    c.peak_x = p.i;
    c.peak_y = p.j;
    c.radius = window_radius;
    const int side = c.side();
    c.window.assign(static_cast<std::size_t>(side) * side, 0.0);
    c.inside.assign(c.window.size(), 0);
    for (int v = 0; v < side; ++v) {
      for (int u = 0; u < side; ++u) {
        const int i = c.origin_x() + u, j = c.origin_y() + v;
        if (i < 0 || j < 0 || i >= w || j >= h) continue;
        c.window[static_cast<std::size_t>(v) * side + u] = frame(i, j);
        c.inside[static_cast<std::size_t>(v) * side + u] = 1;
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

constexpr int kParams = 5;  // amplitude, cx, cy, sigma, offset
using Vec = std::array<double, kParams>;
using MatN = std::array<std::array<double, kParams>, kParams>;

// Pixel-integrated 1D Gaussian over [t, t+1) and its derivatives w.r.t. the
// center and sigma.
struct Profile1D {
  double value, d_center, d_sigma;
};

Profile1D integrated(double t, double c, double s) {
  const double k = 1.0 / (std::sqrt(2.0) * s);
  const double u0 = (t - c) * k;
  const double u1 = (t + 1.0 - c) * k;
  const double g0 = std::exp(-u0 * u0);
  const double g1 = std::exp(-u1 * u1);
  const double norm = 1.0 / std::sqrt(kPi);
  return {0.5 * (std::erf(u1) - std::erf(u0)), norm * k * (g0 - g1),
          norm * (u0 * g0 - u1 * g1) / s};
}

bool solve(MatN a, Vec b, Vec& x) {
  for (int col = 0; col < kParams; ++col) {
    int piv = col;
    for (int r = col + 1; r < kParams; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (!(std::abs(a[piv][col]) > 1e-300)) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < kParams; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < kParams; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int r = kParams - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < kParams; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return true;
}

}  // namespace

CentroidFit fit_centroid(const FlashCandidate& cand, int max_iterations) {
  const int side = cand.side();
  const std::size_t n = cand.window.size();
  if (n != static_cast<std::size_t>(side) * side || cand.inside.size() != n)
    throw Error(ErrorCode::InvalidArgument, "malformed flash window");

  int positive = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < n; ++k) {
    if (!cand.inside[k]) continue;
    if (cand.window[k] > 0.0) ++positive;
    lo = std::min(lo, cand.window[k]);
    hi = std::max(hi, cand.window[k]);
  }
  if (positive < 9) throw Error(ErrorCode::FitFailure, "flash window has fewer than 9 lit pixels");
  if (!(hi > lo)) throw Error(ErrorCode::FitFailure, "flash window is uniform");

  // Moments in window coordinates; pixel u spans [u, u+1).
  double m0 = 0, mx = 0, my = 0;
  for (int v = 0; v < side; ++v)
    for (int u = 0; u < side; ++u) {
      const std::size_t k = static_cast<std::size_t>(v) * side + u;
      if (!cand.inside[k]) continue;
      const double wgt = cand.window[k] - lo;
      m0 += wgt;
      mx += wgt * (u + 0.5);
      my += wgt * (v + 0.5);
    }
  const double cx0 = mx / m0, cy0 = my / m0;
  double var = 0;
  for (int v = 0; v < side; ++v)
    for (int u = 0; u < side; ++u) {
      const std::size_t k = static_cast<std::size_t>(v) * side + u;
      if (!cand.inside[k]) continue;
      const double dx = u + 0.5 - cx0, dy = v + 0.5 - cy0;
      var += (cand.window[k] - lo) * (dx * dx + dy * dy);
    }
  const double sigma0 = std::clamp(std::sqrt(std::max(var / m0 / 2.0 - 1.0 / 12.0, 0.0)), 0.3,
                                   static_cast<double>(cand.radius));

  CentroidFit result;
  result.event = {cand.origin_x() + cx0, cand.origin_y() + cy0, EventKind::Signal};
  result.amplitude = m0;
  result.sigma = sigma0;
  result.offset = lo;

  Vec p{m0, cx0, cy0, sigma0, lo};
  std::vector<double> ex(side), ey(side), dex(side), dey(side), sex(side), sey(side);

  auto evaluate = [&](const Vec& q, std::vector<double>* resid, MatN* jtj, Vec* jtr) {
    for (int t = 0; t < side; ++t) {
      const auto px = integrated(t, q[1], q[3]);
      const auto py = integrated(t, q[2], q[3]);
      ex[t] = px.value, dex[t] = px.d_center, sex[t] = px.d_sigma;
      ey[t] = py.value, dey[t] = py.d_center, sey[t] = py.d_sigma;
    }
    double cost = 0.0;
    if (jtj) *jtj = MatN{};
    if (jtr) *jtr = Vec{};
    for (int v = 0; v < side; ++v)
      for (int u = 0; u < side; ++u) {
        const std::size_t k = static_cast<std::size_t>(v) * side + u;
        if (!cand.inside[k]) continue;
        const double model = q[0] * ex[u] * ey[v] + q[4];
        const double r = cand.window[k] - model;
        cost += r * r;
        if (resid) (*resid)[k] = r;
        if (jtj) {
          const Vec g{ex[u] * ey[v], q[0] * dex[u] * ey[v], q[0] * ex[u] * dey[v],
                      q[0] * (sex[u] * ey[v] + ex[u] * sey[v]), 1.0};
          for (int a = 0; a < kParams; ++a) {
            (*jtr)[a] += g[a] * r;
            for (int b = 0; b < kParams; ++b) (*jtj)[a][b] += g[a] * g[b];
          }
        }
      }
    return cost;
  };

  double lambda = 1e-3;
  MatN jtj;
  Vec jtr;
  double cost = evaluate(p, nullptr, &jtj, &jtr);
  bool converged = false;
  int it = 0;
  for (; it < max_iterations && !converged; ++it) {
    bool stepped = false;
    for (int attempt = 0; attempt < 30 && !stepped; ++attempt) {
      MatN a = jtj;
      for (int d = 0; d < kParams; ++d) a[d][d] += lambda * (jtj[d][d] > 0 ? jtj[d][d] : 1.0);
      Vec step{};
      if (!solve(a, jtr, step)) {
        lambda *= 10;
        continue;
      }
      Vec trial = p;
      for (int d = 0; d < kParams; ++d) trial[d] += step[d];
      if (!(trial[3] > 0.05) || !(trial[0] > 0.0)) {
        lambda *= 10;
        continue;
      }
      const double trial_cost = evaluate(trial, nullptr, nullptr, nullptr);
      if (trial_cost <= cost) {
        double rel = 0.0;
        for (int d = 1; d <= 3; ++d) rel = std::max(rel, std::abs(step[d]));
        rel = std::max(rel, std::abs(step[0]) / std::max(std::abs(p[0]), 1e-300));
        const double drop = cost - trial_cost;
        p = trial;
        cost = evaluate(p, nullptr, &jtj, &jtr);
        lambda = std::max(lambda * 0.1, 1e-12);
        stepped = true;
        if (rel < 1e-10 || drop <= 1e-15 * std::max(cost, 1e-300) || cost == 0.0) converged = true;
      } else {
        lambda *= 10;
      }
    }
    if (!stepped) {
      // No descent direction left: the current point is a stationary point.
      converged = true;
    }
  }

  const double cx = p[1], cy = p[2];
  const bool in_window = cx >= 0.0 && cx <= side && cy >= 0.0 && cy <= side;
  result.iterations = it;
  if (converged && in_window && std::isfinite(cost)) {
    result.event.x = cand.origin_x() + cx;
    result.event.y = cand.origin_y() + cy;
    result.amplitude = p[0];
    result.sigma = p[3];
    result.offset = p[4];
    result.converged = true;
  }
  double norm = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (cand.inside[k]) norm += cand.window[k] * cand.window[k];
  result.residual = std::sqrt(result.converged ? cost : evaluate(p, nullptr, nullptr, nullptr)) /
                    std::sqrt(norm);
  return result;
}

EventList detect_events(const FrameStack& stack, const DetectionParams& params) {
  EventList out;
  if (stack.frames.empty()) return out;
  out.width = stack.frames.front().width();
  out.height = stack.frames.front().height();
  std::vector<std::vector<PhotonEvent>> per_frame(stack.frames.size());
  parallel_for(static_cast<int>(stack.frames.size()), [&](int f) {
    for (const auto& c : find_flashes(stack.frames[f], params.threshold, params.window_radius, f)) {
      try {
        auto fit = fit_centroid(c);
        auto e = fit.event;
        if (e.x >= 0.0 && e.x < out.width && e.y >= 0.0 && e.y < out.height) per_frame[f].push_back(e);
      } catch (const Error&) {
        // Too few lit pixels: not a flash.
      }
    }
  });
  for (auto& v : per_frame) out.events.insert(out.events.end(), v.begin(), v.end());
  return out;
}

}  // namespace holo
