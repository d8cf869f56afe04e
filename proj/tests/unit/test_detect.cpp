#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "core/detect.hpp"
#include "core/error.hpp"
#include "core/photonsim.hpp"

using namespace holo;

namespace {

// Pixel [i, i+1) x [j, j+1) integral of an isotropic Gaussian by midpoint
// quadrature; independent of the erf-based renderer.
double pixel_integral(double cx, double cy, double sigma, int i, int j, int sub = 40) {
  double acc = 0.0;
  const double h = 1.0 / sub;
  for (int b = 0; b < sub; ++b)
    for (int a = 0; a < sub; ++a) {
      const double x = i + (a + 0.5) * h - cx;
      const double y = j + (b + 0.5) * h - cy;
      acc += std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
    }
  return acc * h * h / (2.0 * kPi * sigma * sigma);
}

FlashCandidate synthetic_window(double cx, double cy, double sigma, double amplitude, int radius) {
  FlashCandidate c;
  c.radius = radius;
  c.peak_x = static_cast<int>(cx);
  c.peak_y = static_cast<int>(cy);
  for (int v = 0; v < c.side(); ++v)
    for (int u = 0; u < c.side(); ++u) {
      c.window.push_back(amplitude * pixel_integral(cx, cy, sigma, c.origin_x() + u, c.origin_y() + v));
      c.inside.push_back(1);
    }
  return c;
}

RealMap shifted(const RealMap& f, int dx, int dy) {
  RealMap out(f.width(), f.height(), 0.0);
  for (int j = 0; j < f.height(); ++j)
    for (int i = 0; i < f.width(); ++i) {
      const int ii = i + dx, jj = j + dy;
      if (ii >= 0 && jj >= 0 && ii < f.width() && jj < f.height()) out(ii, jj) = f(i, j);
    }
  return out;
}

}  // namespace

TEST(FindFlashes, EmptyFrame) {
  EXPECT_TRUE(find_flashes(RealMap(32, 32, 0.0), 0.5, 3).empty());
  EXPECT_THROW(find_flashes(RealMap(32, 32, 0.0), 0.0, 3), Error);
}

TEST(FindFlashes, SingleRenderedFlash) {
  FrameParams p;
  p.gain_dispersion = 0.0;
  EventList ev{64, 64, {{40.3, 17.8}}};
  const auto frame = render_frame(ev.events, 64, 64, p, 1, 0);
  const auto c = find_flashes(frame, 1.0, 3);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_LE(std::abs(c[0].peak_x - 40), 1);
  EXPECT_LE(std::abs(c[0].peak_y - 18), 1);
  EXPECT_EQ(c[0].side() % 2, 1);
  EXPECT_EQ(c[0].window.size(), 49u);
}

TEST(FindFlashes, SeparatedAndMergedFlashes) {
  FrameParams p;
  p.gain_dispersion = 0.0;
  const auto two = render_frame(std::vector<PhotonEvent>{{10.5, 10.5}, {20.5, 10.5}}, 32, 32, p, 1, 0);
  EXPECT_EQ(find_flashes(two, 1.0, 3).size(), 2u);
  // two flashes 2 px apart collapse to one candidate
  const auto close = render_frame(std::vector<PhotonEvent>{{10.5, 10.5}, {12.5, 10.5}}, 32, 32, p, 1, 0);
  EXPECT_EQ(find_flashes(close, 1.0, 3).size(), 1u);
}

TEST(FitCentroid, AnalyticGaussianRecovered) {
  const auto c = synthetic_window(10.25, 10.75, 1.5, 500.0, 4);
  const auto fit = fit_centroid(c);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.event.x, 10.25, 0.02);
  EXPECT_NEAR(fit.event.y, 10.75, 0.02);
  EXPECT_NEAR(fit.sigma, 1.5, 0.01);
}

TEST(FitCentroid, SymmetricWindowGivesMidpoint) {
  const auto c = synthetic_window(7.5, 9.5, 1.3, 100.0, 3);
  const auto fit = fit_centroid(c);
  EXPECT_NEAR(fit.event.x, 7.5, 1e-9);
  EXPECT_NEAR(fit.event.y, 9.5, 1e-9);
}

TEST(FitCentroid, UniformWindowFails) {
  FlashCandidate c;
  c.radius = 2;
  c.window.assign(25, 3.0);
  c.inside.assign(25, 1);
  try {
    fit_centroid(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FitFailure);
  }
  c.window.assign(25, 0.0);
  c.window[12] = 1.0;
  EXPECT_THROW(fit_centroid(c), Error);
}

TEST(FitCentroid, NoiselessRenderedFlashResidual) {
  FrameParams p;
  p.gain_dispersion = 0.0;
  const auto frame = render_frame(std::vector<PhotonEvent>{{30.37, 21.81}}, 64, 64, p, 1, 0);
  const auto c = find_flashes(frame, 0.05, 3);
  ASSERT_EQ(c.size(), 1u);
  const auto fit = fit_centroid(c[0]);
  EXPECT_TRUE(fit.converged);
  EXPECT_LT(fit.residual, 1e-6);
  EXPECT_NEAR(fit.event.x, 30.37, 1e-6);
  EXPECT_NEAR(fit.event.y, 21.81, 1e-6);
}

TEST(FitCentroid, TranslationEquivariance) {
  FrameParams p;
  const auto frame = render_frame(std::vector<PhotonEvent>{{20.2, 22.9}, {40.6, 15.3}}, 64, 64, p, 3, 0);
  const auto moved = shifted(frame, 7, -4);
  const auto a = find_flashes(frame, 0.05, 3);
  const auto b = find_flashes(moved, 0.05, 3);
  ASSERT_EQ(a.size(), 2u);
  ASSERT_EQ(b.size(), 2u);
  for (int k = 0; k < 2; ++k) {
    const auto fa = fit_centroid(a[k]);
    const auto fb = fit_centroid(b[k]);
    EXPECT_NEAR(fb.event.x - fa.event.x, 7.0, 1e-6);
    EXPECT_NEAR(fb.event.y - fa.event.y, -4.0, 1e-6);
  }
}

TEST(DetectEvents, RoundTrip) {
  const int w = 512, h = 512;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0.0, w), uy(0.0, h);
  EventList truth{w, h, {}};
  for (int k = 0; k < 3000; ++k) truth.events.push_back({ux(rng), uy(rng)});
  const int per_frame = 10;
  const auto stack = render_frames(truth, per_frame, FrameParams{}, 11);
  const auto found = detect_events(stack, DetectionParams{});

  // match per frame: each truth event to the nearest detection in its frame
  int recovered = 0;
  double ss = 0.0;
  std::size_t cursor = 0;
  std::vector<std::vector<PhotonEvent>> by_frame(stack.frames.size());
  for (std::size_t f = 0; f < stack.frames.size(); ++f) {
    const auto c = find_flashes(stack.frames[f], DetectionParams{}.threshold, DetectionParams{}.window_radius);
    for (std::size_t k = 0; k < c.size(); ++k) by_frame[f].push_back(found.events[cursor++]);
  }
  ASSERT_EQ(cursor, found.events.size());
  for (std::size_t k = 0; k < truth.events.size(); ++k) {
    const auto& t = truth.events[k];
    double best = 1e9;
    for (const auto& d : by_frame[k / per_frame]) best = std::min(best, std::hypot(d.x - t.x, d.y - t.y));
    if (best < 1.0) {
      ++recovered;
      ss += best * best;
    }
  }
  EXPECT_GE(recovered, static_cast<int>(0.99 * truth.events.size()));
  EXPECT_LT(std::sqrt(ss / recovered), 0.25);
  EXPECT_LE(found.events.size(), truth.events.size());
}
