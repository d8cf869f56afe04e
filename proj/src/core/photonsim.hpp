#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/field.hpp"

namespace holo {

enum class EventKind : std::uint8_t { Signal = 0, Dark = 1, Accidental = 2 };

// Sub-pixel detection position; pixel i spans [i, i+1).
struct PhotonEvent {
  double x = 0.0;
  double y = 0.0;
  EventKind kind = EventKind::Signal;

  friend bool operator==(const PhotonEvent&, const PhotonEvent&) = default;
};

struct EventList {
  int width = 0;
  int height = 0;
  std::vector<PhotonEvent> events;
};

enum class AccidentalShape { SignalShaped, Uniform };

struct NoiseSpec {
  double dark_rate = 25.0;        // Hz
  double accidental_rate = 3.0;   // Hz
  double signal_rate = 400.0;     // Hz
  double exposure = 1.0;          // s
  AccidentalShape accidental_shape = AccidentalShape::SignalShaped;

  void validate() const;
};

struct FrameParams {
  double psf_sigma = 1.5;        // px
  double gain_mean = 200.0;      // integrated counts per flash
  double gain_dispersion = 1.0;  // 0 = fixed gain, 1 = exponential

  void validate() const;
};

struct FrameStack {
  std::vector<RealMap> frames;
  FrameParams params;
};

struct Interferogram {
  GridSpec grid;
  Array2D<std::uint32_t> counts;
  std::uint64_t discarded = 0;

  std::uint64_t total() const noexcept;
};

EventList sample_events(const IntensityMap& intensity, double n_expected, std::uint64_t seed);

EventList add_noise(const EventList& events, const NoiseSpec& noise, const IntensityMap& intensity,
                    std::uint64_t seed);

// One frame from a span of events. `frame_index` keys the gain stream.
RealMap render_frame(std::span<const PhotonEvent> events, int width, int height,
                     const FrameParams& params, std::uint64_t seed, std::uint64_t frame_index);

FrameStack render_frames(const EventList& events, int events_per_frame, const FrameParams& params,
                         std::uint64_t seed);

Interferogram histogram_events(const EventList& events, const GridSpec& grid);

// Histogram identical to histogram_events(add_noise(sample_events(...))) for
// the same seeds, without materializing the event list.
Interferogram simulate_interferogram(const IntensityMap& intensity, double n_expected,
                                     const NoiseSpec* noise, std::uint64_t seed);

}  // namespace holo
