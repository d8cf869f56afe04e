#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "core/recon.hpp"

namespace holo {

// Upper bound imposed on the circular standard deviation.
constexpr double kCircularStdBound = kPi * 2.0 / 1.7320508075688772;

struct UncertaintyMaps {
  RealMap mean_phase;  // circular mean, unwrapped; NaN outside validity
  RealMap std_phase;   // circular std; NaN outside validity
  Mask validity;
  int n_resamples = 0;
  std::uint64_t seed = 0;
  int failures = 0;
};

struct BootstrapOptions {
  int n_resamples = 1000;
  std::uint64_t seed = 0;
  // Test hook: every resample uses the same draw.
  bool same_draw_every_resample = false;
  unsigned max_workers = 0;
};

UncertaintyMaps bootstrap(const Interferogram& interferogram, const Interferogram* reference,
                          const ReconParams& params, const BootstrapOptions& options);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  double slope_error = 0.0;
};

struct ProfileResult {
  std::vector<double> abscissa;   // meters (band profiles) or radians (azimuthal)
  std::vector<double> values;     // radians
  std::vector<double> errors;     // std of the band mean
  std::vector<double> pixel_std;  // RMS per-pixel std across the band
  std::vector<double> spread;     // std of the phase values across the band
  std::vector<std::uint8_t> valid;
  std::optional<LinearFit> fit;
};

struct VisibilityResult {
  RealMap map;  // clipped to [0, 1]; 0 outside validity
  double summary = 0.0;  // median over validity
  double clip_fraction = 0.0;
};

VisibilityResult visibility(const ReconstructionResult& recon, const RealMap& dc_intensity);
inline VisibilityResult visibility(const ReconstructionResult& recon) {
  return visibility(recon, recon.dc_intensity);
}

// Direction along which the profile runs. Columns: average over a column range,
// profile versus row (y). Rows: average over a row range, profile versus x.
enum class BandAxis { Columns, Rows };

ProfileResult band_average(const RealMap& phase, const RealMap* std, const GridSpec& grid, BandAxis axis,
                           int begin, int end);

ProfileResult column_average(const RealMap& phase, const RealMap* std, const GridSpec& grid, int begin,
                             int end);
ProfileResult column_average(const RealMap& phase, const RealMap* std, const GridSpec& grid);  // middle 50

std::pair<int, int> middle_band(int extent, int count = 50);

ProfileResult azimuthal_profile(const RealMap& phase, double center_x, double center_y, double r_inner,
                                double r_outer, int n_bins);

struct TheoryComparison {
  double rms_error = 0.0;
  double max_error = 0.0;
  double offset_fitted = 0.0;
  int n_points = 0;
};

// Profile abscissa is measured along `axis`'s running direction through the
// grid origin; only a constant offset is fitted.
TheoryComparison compare_theory(const ProfileResult& profile, const PhaseMask& model, BandAxis axis,
                                double across = 0.0);

// Circular mean and std of a set of angles.
struct CircularStats {
  double mean = 0.0;
  double std = 0.0;
  double resultant = 0.0;
};
CircularStats circular_stats(const std::vector<double>& angles);
double circular_std_from_resultant(double r);

}  // namespace holo
