#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "core/error.hpp"
#include "core/field.hpp"
#include "core/photonsim.hpp"
#include "core/recon.hpp"
#include "core/stats.hpp"

using namespace holo;

namespace {

GridSpec grid_n(int n) {
  GridSpec g;
  g.width = g.height = n;
  g.pitch = 10e-6;
  return g;
}

const TiltSpec kTilt{1.2 / 10e-6, 1.2 / 10e-6, 0.0};

IntensityMap intensity(const GridSpec& g, const PhaseMask& mask, double rho = 1.0) {
  const auto beam = gaussian_field(g, 400e-6);
  ComplexField r = beam;
  for (auto& v : r.values) v *= rho;
  return interfere(apply_mask(beam, mask), r, kTilt);
}

bool bitwise_equal(const RealMap& a, const RealMap& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double median_std(const UncertaintyMaps& u) {
  std::vector<double> v;
  for (std::size_t k = 0; k < u.std_phase.size(); ++k)
    if (u.validity[k]) v.push_back(u.std_phase[k]);
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

RealMap spiral_map(int n, double charge, double cx, double cy) {
  RealMap m(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m(i, j) = charge * std::atan2(j - cy, i - cx);
  return m;
}

}  // namespace

TEST(CircularStats, WrapAroundMean) {
  const auto s = circular_stats({kPi - 0.1, -kPi + 0.1});
  EXPECT_NEAR(std::abs(s.mean), kPi, 1e-12);
  EXPECT_NEAR(s.resultant, std::cos(0.1), 1e-12);
  EXPECT_NEAR(s.std, std::sqrt(-2.0 * std::log(std::cos(0.1))), 1e-12);
}

TEST(CircularStats, StdIsBounded) {
  EXPECT_EQ(circular_std_from_resultant(0.0), kCircularStdBound);
  EXPECT_EQ(circular_std_from_resultant(1.0), 0.0);
  EXPECT_LE(circular_std_from_resultant(1e-9), kCircularStdBound);
  const auto s = circular_stats({0.0, kPi / 2, kPi, -kPi / 2});
  EXPECT_LE(s.std, kCircularStdBound);
}

TEST(Bootstrap, DegenerateDrawsGiveZeroStd) {
  const auto g = grid_n(128);
  const auto i = intensity(g, PhaseMask{MaskKind::Quadratic2D, 125e-3});
  const auto img = simulate_interferogram(i, 1e5, nullptr, 1);
  BootstrapOptions opt;
  opt.n_resamples = 2;
  opt.seed = 4;
  opt.same_draw_every_resample = true;
  const auto u = bootstrap(img, nullptr, ReconParams{}, opt);
  int n = 0;
  for (std::size_t k = 0; k < u.std_phase.size(); ++k)
    if (u.validity[k]) {
      EXPECT_EQ(u.std_phase[k], 0.0);
      ++n;
    }
  EXPECT_GT(n, 100);
}

TEST(Bootstrap, DeterministicAndScheduleIndependent) {
  const auto g = grid_n(128);
  const auto i = intensity(g, PhaseMask{MaskKind::Quadratic2D, 125e-3});
  const auto img = simulate_interferogram(i, 2e5, nullptr, 1);
  const auto ref = simulate_interferogram(intensity(g, PhaseMask{}), 2e5, nullptr, 2);
  BootstrapOptions opt;
  opt.n_resamples = 24;
  opt.seed = 99;
  const auto a = bootstrap(img, &ref, ReconParams{}, opt);
  opt.max_workers = 1;
  const auto b = bootstrap(img, &ref, ReconParams{}, opt);
  EXPECT_TRUE(bitwise_equal(a.std_phase, b.std_phase));
  EXPECT_TRUE(bitwise_equal(a.mean_phase, b.mean_phase));
  EXPECT_EQ(a.validity, b.validity);
  EXPECT_EQ(a.n_resamples, 24);
  opt.seed = 100;
  const auto c = bootstrap(img, &ref, ReconParams{}, opt);
  EXPECT_FALSE(bitwise_equal(a.std_phase, c.std_phase));
}

TEST(Bootstrap, StdWithinCircularBound) {
  const auto g = grid_n(128);
  const auto img = simulate_interferogram(intensity(g, PhaseMask{MaskKind::Spiral}), 3e3, nullptr, 5);
  BootstrapOptions opt;
  opt.n_resamples = 16;
  const auto u = bootstrap(img, nullptr, ReconParams{}, opt);
  for (std::size_t k = 0; k < u.std_phase.size(); ++k) {
    if (!u.validity[k]) continue;
    EXPECT_GE(u.std_phase[k], 0.0);
    EXPECT_LE(u.std_phase[k], kCircularStdBound);
  }
}

TEST(Bootstrap, StdScalesAsInverseSqrtN) {
  const auto g = grid_n(256);
  const auto i = intensity(g, PhaseMask{MaskKind::Quadratic2D, 125e-3});
  const auto ref_i = intensity(g, PhaseMask{});
  BootstrapOptions opt;
  opt.n_resamples = 60;
  opt.seed = 3;
  auto med = [&](double n) {
    const auto img = simulate_interferogram(i, n, nullptr, 11);
    const auto ref = simulate_interferogram(ref_i, n, nullptr, 12);
    return median_std(bootstrap(img, &ref, ReconParams{}, opt));
  };
  const double ratio = med(1e6) / med(4e6);
  EXPECT_NEAR(ratio, 2.0, 0.2);
}

TEST(Bootstrap, RejectsTooFewResamples) {
  const auto g = grid_n(64);
  Interferogram img{g, Array2D<std::uint32_t>(64, 64, 1)};
  BootstrapOptions opt;
  opt.n_resamples = 1;
  EXPECT_THROW(bootstrap(img, nullptr, ReconParams{}, opt), Error);
}

TEST(ColumnAverage, ConstantPhase) {
  const auto g = grid_n(128);
  RealMap ph(128, 128, 0.75), sd(128, 128, 0.2);
  const auto p = column_average(ph, &sd, g);
  ASSERT_EQ(p.values.size(), 128u);
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    EXPECT_DOUBLE_EQ(p.values[k], 0.75);
    EXPECT_NEAR(p.spread[k], 0.0, 1e-12);
    EXPECT_NEAR(p.pixel_std[k], 0.2, 1e-12);
    EXPECT_NEAR(p.errors[k], 0.2 / std::sqrt(50.0), 1e-12);
  }
}

TEST(ColumnAverage, PlaneGivesLinearProfile) {
  const auto g = grid_n(128);
  RealMap ph(128, 128);
  const double c1 = 300.0;  // rad/m along y
  for (int j = 0; j < 128; ++j)
    for (int i = 0; i < 128; ++i) ph(i, j) = c1 * g.y_at(j) + 2.0 * g.x_at(i);
  const auto p = column_average(ph, nullptr, g);
  for (std::size_t k = 1; k < p.values.size(); ++k)
    EXPECT_NEAR((p.values[k] - p.values[k - 1]) / (p.abscissa[k] - p.abscissa[k - 1]), c1, 1e-6);
}

TEST(ColumnAverage, DefaultIsMiddleFiftyColumns) {
  const auto g = grid_n(512);
  EXPECT_EQ(middle_band(512), std::make_pair(231, 281));
  RealMap ph(512, 512, 0.0);
  for (int j = 0; j < 512; ++j)
    for (int i = 231; i < 281; ++i) ph(i, j) = 1.0;
  ph(230, 7) = std::nan("");
  ph(281, 9) = std::nan("");
  const auto p = column_average(ph, nullptr, g);
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    EXPECT_TRUE(p.valid[k]);
    EXPECT_EQ(p.values[k], 1.0);
  }
  ph(240, 3) = std::nan("");
  EXPECT_FALSE(column_average(ph, nullptr, g).valid[3]);
  EXPECT_THROW(column_average(ph, nullptr, g, 10, 10), Error);
}

TEST(AzimuthalProfile, AnalyticSpiralSlope) {
  for (double charge : {1.0, 3.0}) {
    const auto m = spiral_map(128, charge, 64.0, 64.0);
    const auto p = azimuthal_profile(m, 64.0, 64.0, 10.0, 40.0, 36);
    ASSERT_TRUE(p.fit);
    EXPECT_NEAR(p.fit->slope, charge, 1e-6);
    EXPECT_LT(p.fit->residual_rms, 1e-3);
  }
}

TEST(AzimuthalProfile, OffsetAndPlaneInvariance) {
  auto m = spiral_map(128, 1.0, 64.0, 64.0);
  const double base = azimuthal_profile(m, 64.0, 64.0, 10.0, 40.0, 36).fit->slope;
  for (int j = 0; j < 128; ++j)
    for (int i = 0; i < 128; ++i) m(i, j) += 2.5 + 0.04 * (i - 64.0) - 0.03 * (j - 64.0);
  const auto p = azimuthal_profile(m, 64.0, 64.0, 10.0, 40.0, 36);
  EXPECT_NEAR(p.fit->slope, base, 0.01);
}

TEST(AzimuthalProfile, EmptyBinsSkipped) {
  auto m = spiral_map(128, 1.0, 64.0, 64.0);
  for (int j = 0; j < 64; ++j)
    for (int i = 64; i < 128; ++i) m(i, j) = std::nan("");
  const auto p = azimuthal_profile(m, 64.0, 64.0, 10.0, 40.0, 36);
  EXPECT_LT(std::count(p.valid.begin(), p.valid.end(), 1), 36);
  ASSERT_TRUE(p.fit);
  EXPECT_NEAR(p.fit->slope, 1.0, 1e-6);
  EXPECT_THROW(azimuthal_profile(m, 64.0, 64.0, 10.0, 40.0, 4), Error);
  EXPECT_THROW(azimuthal_profile(m, 64.0, 64.0, 40.0, 10.0, 36), Error);
}

TEST(CompareTheory, ExactAndOffsetProfiles) {
  const PhaseMask mask{MaskKind::Quadratic1D, 58e-3};
  ProfileResult p;
  for (int k = -50; k < 50; ++k) {
    p.abscissa.push_back(k * 10e-6);
    p.values.push_back(mask.phase_at(k * 10e-6, 0.0));
    p.valid.push_back(1);
  }
  auto c = compare_theory(p, mask, BandAxis::Rows);
  EXPECT_NEAR(c.rms_error, 0.0, 1e-12);
  EXPECT_NEAR(c.offset_fitted, 0.0, 1e-12);
  EXPECT_EQ(c.n_points, 100);
  for (double& v : p.values) v += 0.3;
  c = compare_theory(p, mask, BandAxis::Rows);
  EXPECT_NEAR(c.rms_error, 0.0, 1e-12);
  EXPECT_NEAR(c.offset_fitted, 0.3, 1e-12);
  p.values[10] += 1.0;
  p.valid[20] = 0;
  c = compare_theory(p, mask, BandAxis::Rows);
  EXPECT_EQ(c.n_points, 99);
  EXPECT_GT(c.rms_error, 0.05);
}

TEST(Visibility, ClosedFormForNoiselessArms) {
  const auto g = grid_n(256);
  for (double rho : {1.0, 0.5, 0.25}) {
    const auto i = intensity(g, PhaseMask{}, rho);
    const auto r = reconstruct(i.values, nullptr, g);
    const auto v = visibility(r);
    EXPECT_NEAR(v.summary, 2.0 * rho / (1.0 + rho * rho), 0.01) << rho;
    EXPECT_LT(v.clip_fraction, 0.01);
    for (double x : v.map) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
  }
}

TEST(Visibility, EmptyValidityRejected) {
  const auto g = grid_n(128);
  const auto r = reconstruct(intensity(g, PhaseMask{}).values, nullptr, g);
  auto broken = r;
  std::fill(broken.validity.begin(), broken.validity.end(), 0);
  EXPECT_THROW(visibility(broken), Error);
}
