#include "core/photonsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace holo {

void NoiseSpec::validate() const {
  if (dark_rate < 0.0 || accidental_rate < 0.0 || signal_rate < 0.0)
    throw Error(ErrorCode::Configuration, "noise rates must be nonnegative");
  if (!(exposure > 0.0)) throw Error(ErrorCode::Configuration, "exposure must be positive");
}

void FrameParams::validate() const {
  if (!(psf_sigma > 0.0)) throw Error(ErrorCode::Configuration, "psf_sigma must be positive");
  if (!(gain_mean > 0.0)) throw Error(ErrorCode::Configuration, "gain_mean must be positive");
  if (gain_dispersion < 0.0 || gain_dispersion > 1.0)
    throw Error(ErrorCode::Configuration, "gain_dispersion must lie in [0, 1]");
}

std::uint64_t Interferogram::total() const noexcept {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

namespace {

// i + u for u in [0, 1), kept strictly inside [i, i+1) despite rounding.
double in_pixel(int i, double u) noexcept {
  const double v = static_cast<double>(i) + u;
  const double hi = static_cast<double>(i) + 1.0;
  return v < hi ? v : std::nextafter(hi, 0.0);
}

void check_normalized(const IntensityMap& intensity) {
  double total = 0.0;
  for (double v : intensity.values) {
    if (v < 0.0 || !std::isfinite(v))
      throw Error(ErrorCode::InvalidArgument, "intensity must be finite and nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw Error(ErrorCode::InvalidArgument, "intensity must be normalized to unit sum");
}

// Per-row Poisson counts. Stream (kCounts, row) is used only here so that the
// counts do not depend on whether sub-pixel jitter is drawn.
std::vector<std::uint32_t> row_counts(const IntensityMap& intensity, double n_expected,
                                      std::uint64_t seed, int j) {
  const int w = intensity.values.width();
  std::vector<std::uint32_t> counts(w);
  auto rng = substream(seed, streams::kCounts, static_cast<std::uint64_t>(j));
  for (int i = 0; i < w; ++i) {
    const double mean = n_expected * intensity.values(i, j);
    if (mean <= 0.0) continue;
    std::poisson_distribution<std::uint32_t> pois(mean);
    counts[i] = pois(rng);
  }
  return counts;
}

std::vector<PhotonEvent> noise_events(const NoiseSpec& noise, const IntensityMap& intensity,
                                      std::uint64_t seed) {
  noise.validate();
  const int w = intensity.values.width();
  const int h = intensity.values.height();
  std::vector<PhotonEvent> out;

  const double dark_mean = noise.dark_rate * noise.exposure;
  if (dark_mean > 0.0) {
    auto rng = substream(seed, streams::kDark);
    const auto n = std::poisson_distribution<std::uint64_t>(dark_mean)(rng);
    for (std::uint64_t k = 0; k < n; ++k) {
      const double x = uniform01(rng) * w;
      const double y = uniform01(rng) * h;
      out.push_back({x, y, EventKind::Dark});
    }
  }

  const double acc_mean = noise.accidental_rate * noise.exposure;
  if (acc_mean > 0.0) {
    auto rng = substream(seed, streams::kAccidental);
    const auto n = std::poisson_distribution<std::uint64_t>(acc_mean)(rng);
    if (noise.accidental_shape == AccidentalShape::Uniform) {
      for (std::uint64_t k = 0; k < n; ++k) {
        const double x = uniform01(rng) * w;
        const double y = uniform01(rng) * h;
        out.push_back({x, y, EventKind::Accidental});
      }
    } else {
      std::discrete_distribution<std::size_t> pick(intensity.values.begin(), intensity.values.end());
      for (std::uint64_t k = 0; k < n; ++k) {
        const std::size_t p = pick(rng);
        const double jx = uniform01(rng);
        const double jy = uniform01(rng);
        const double x = in_pixel(static_cast<int>(p % w), jx);
        const double y = in_pixel(static_cast<int>(p / w), jy);
        out.push_back({x, y, EventKind::Accidental});
      }
    }
  }
  return out;
}

void bin_event(Interferogram& hist, const PhotonEvent& e) {
  const int w = hist.counts.width();
  const int h = hist.counts.height();
  if (!(e.x >= 0.0 && e.x < w && e.y >= 0.0 && e.y < h)) {
    ++hist.discarded;
    return;
  }
  ++hist.counts(static_cast<int>(e.x), static_cast<int>(e.y));
}

}  // namespace

EventList sample_events(const IntensityMap& intensity, double n_expected, std::uint64_t seed) {
  if (!(n_expected > 0.0)) throw Error(ErrorCode::InvalidArgument, "n_expected must be positive");
  check_normalized(intensity);
  const int w = intensity.values.width();
  const int h = intensity.values.height();

  std::vector<std::vector<PhotonEvent>> rows(h);
  parallel_for(h, [&](int j) {
    const auto counts = row_counts(intensity, n_expected, seed, j);
    auto rng = substream(seed, streams::kJitter, static_cast<std::uint64_t>(j));
    auto& row = rows[j];
    row.reserve(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    for (int i = 0; i < w; ++i) {
      for (std::uint32_t c = 0; c < counts[i]; ++c) {
        const double jx = uniform01(rng);
        const double jy = uniform01(rng);
        row.push_back({in_pixel(i, jx), in_pixel(j, jy), EventKind::Signal});
      }
    }
  });

  EventList out{w, h, {}};
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  out.events.reserve(total);
  for (auto& r : rows) out.events.insert(out.events.end(), r.begin(), r.end());
  return out;
}

EventList add_noise(const EventList& events, const NoiseSpec& noise, const IntensityMap& intensity,
                    std::uint64_t seed) {
  if (events.width != intensity.values.width() || events.height != intensity.values.height())
    throw Error(ErrorCode::Dimension, "add_noise: event bounds and intensity grid differ");
  auto extra = noise_events(noise, intensity, seed);
  if (extra.empty()) return events;

  // Random insertion slots keep the signal events in their original order.
  auto rng = substream(seed, streams::kInterleave);
  const std::size_t n_signal = events.events.size();
  std::uniform_int_distribution<std::size_t> slot(0, n_signal);
  std::vector<std::pair<std::size_t, std::size_t>> placed(extra.size());
  for (std::size_t k = 0; k < extra.size(); ++k) placed[k] = {slot(rng), k};
  std::sort(placed.begin(), placed.end());

  EventList out{events.width, events.height, {}};
  out.events.reserve(n_signal + extra.size());
  std::size_t next = 0;
  for (std::size_t s = 0; s <= n_signal; ++s) {
    while (next < placed.size() && placed[next].first == s) out.events.push_back(extra[placed[next++].second]);
    if (s < n_signal) out.events.push_back(events.events[s]);
  }
  return out;
}

RealMap render_frame(std::span<const PhotonEvent> events, int width, int height,
                     const FrameParams& params, std::uint64_t seed, std::uint64_t frame_index) {
  params.validate();
  RealMap frame(width, height);
  auto rng = substream(seed, streams::kGain, frame_index);
  std::exponential_distribution<double> expo(1.0);
  const double s = params.psf_sigma;
  const double inv = 1.0 / (std::sqrt(2.0) * s);
  const int reach = static_cast<int>(std::ceil(6.0 * s));
  std::vector<double> wx, wy;
  for (const auto& e : events) {
    const double d = params.gain_dispersion;
    const double amp = params.gain_mean * ((1.0 - d) + d * expo(rng));
    const int ci = static_cast<int>(std::floor(e.x));
    const int cj = static_cast<int>(std::floor(e.y));
    const int i0 = std::max(0, ci - reach), i1 = std::min(width - 1, ci + reach);
    const int j0 = std::max(0, cj - reach), j1 = std::min(height - 1, cj + reach);
    if (i0 > i1 || j0 > j1) continue;
    wx.assign(i1 - i0 + 1, 0.0);
    wy.assign(j1 - j0 + 1, 0.0);
    for (int i = i0; i <= i1; ++i)
      wx[i - i0] = 0.5 * (std::erf((i + 1 - e.x) * inv) - std::erf((i - e.x) * inv));
    for (int j = j0; j <= j1; ++j)
      wy[j - j0] = 0.5 * (std::erf((j + 1 - e.y) * inv) - std::erf((j - e.y) * inv));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) frame(i, j) += amp * wx[i - i0] * wy[j - j0];
  }
  return frame;
}

FrameStack render_frames(const EventList& events, int events_per_frame, const FrameParams& params,
                         std::uint64_t seed) {
  if (events_per_frame < 1) throw Error(ErrorCode::InvalidArgument, "events_per_frame must be >= 1");
  params.validate();
  const std::size_t n = events.events.size();
  const std::size_t n_frames = std::max<std::size_t>(1, (n + events_per_frame - 1) / events_per_frame);
  FrameStack stack;
  stack.params = params;
  stack.frames.resize(n_frames);
  parallel_for(static_cast<int>(n_frames), [&](int f) {
    const std::size_t b = std::min(n, static_cast<std::size_t>(f) * events_per_frame);
    const std::size_t e = std::min(n, b + events_per_frame);
    stack.frames[f] = render_frame(std::span(events.events).subspan(b, e - b), events.width,
                                   events.height, params, seed, static_cast<std::uint64_t>(f));
  });
  return stack;
}

Interferogram histogram_events(const EventList& events, const GridSpec& grid) {
  Interferogram hist{grid, Array2D<std::uint32_t>(grid.width, grid.height), 0};
  for (const auto& e : events.events) bin_event(hist, e);
  return hist;
}

Interferogram simulate_interferogram(const IntensityMap& intensity, double n_expected,
                                     const NoiseSpec* noise, std::uint64_t seed) {
  if (!(n_expected > 0.0)) throw Error(ErrorCode::InvalidArgument, "n_expected must be positive");
  check_normalized(intensity);
  const GridSpec& g = intensity.grid;
  Interferogram hist{g, Array2D<std::uint32_t>(g.width, g.height), 0};
  parallel_for(g.height, [&](int j) {
    const auto counts = row_counts(intensity, n_expected, seed, j);
    for (int i = 0; i < g.width; ++i) hist.counts(i, j) = counts[i];
  });
  if (noise)
    for (const auto& e : noise_events(*noise, intensity, seed)) bin_event(hist, e);
  return hist;
}

}  // namespace holo
