#pragma once

#include <cstdint>
#include <vector>

#include "core/photonsim.hpp"

namespace holo {

// Odd-sized patch around a local maximum. Pixels outside the frame are zero
// and flagged out in `inside`.
struct FlashCandidate {
  int frame_index = 0;
  int peak_x = 0;
  int peak_y = 0;
  int radius = 0;
  std::vector<double> window;          // (2r+1)^2, row-major
  std::vector<std::uint8_t> inside;

  int side() const noexcept { return 2 * radius + 1; }
  int origin_x() const noexcept { return peak_x - radius; }
  int origin_y() const noexcept { return peak_y - radius; }
  double at(int u, int v) const noexcept { return window[static_cast<std::size_t>(v) * side() + u]; }
};

struct CentroidFit {
  PhotonEvent event;
  double amplitude = 0.0;  // integrated counts
  double sigma = 0.0;
  double offset = 0.0;
  double residual = 0.0;   // ||data - model|| / ||data||
  int iterations = 0;
  bool converged = false;  // false: event holds the weighted-centroid fallback
};

std::vector<FlashCandidate> find_flashes(const RealMap& frame, double threshold, int window_radius,
                                         int frame_index = 0);

CentroidFit fit_centroid(const FlashCandidate& candidate, int max_iterations = 100);

struct DetectionParams {
  double threshold = 0.01;  // frames carry no read noise
  int window_radius = 3;
};

// find_flashes + fit_centroid over every frame, in frame order.
EventList detect_events(const FrameStack& stack, const DetectionParams& params);

}  // namespace holo
