#include "core/simulate.hpp"

#include "core/detect.hpp"
#include "core/rng.hpp"

namespace holo {

FieldPair build_fields(const SimConfig& cfg) {
  cfg.validate();
  const ComplexField beam = gaussian_field(cfg.grid, cfg.waist);
  FieldPair out;
  out.unknown = apply_mask(beam, cfg.mask);
  if (cfg.reference_mode == ReferenceMode::Analytic) {
    const double w = cfg.reference_waist > 0.0 ? cfg.reference_waist : cfg.waist;
    out.reference = gaussian_field(cfg.grid, w);
  } else {
    // The pinhole sees the beam after the mask, as in the filter arm.
    out.reference = reference_from_filter(out.unknown, cfg.pinhole_radius,
                                          {cfg.pinhole_offset_x, cfg.pinhole_offset_y});
  }
  for (auto& v : out.reference.values) v *= cfg.amplitude_ratio;
  return out;
}

SimulationRun simulate(const SimConfig& cfg, double n_events, std::uint64_t seed, bool keep_events) {
  const FieldPair fields = build_fields(cfg);
  SimulationRun run;
  run.intensity = interfere(fields.unknown, fields.reference, cfg.tilt);

  NoiseSpec noise = cfg.noise;
  noise.exposure = noise.signal_rate > 0.0 ? n_events / noise.signal_rate : 1.0;

  if (!keep_events && !cfg.render_camera) {
    run.interferogram = simulate_interferogram(run.intensity, n_events, &noise, seed);
    return run;
  }
  EventList events = add_noise(sample_events(run.intensity, n_events, seed), noise, run.intensity, seed);
  if (cfg.render_camera) {
    // Frames are rendered and detected in chunks to bound memory.
    EventList detected{events.width, events.height, {}};
    const std::size_t chunk = static_cast<std::size_t>(cfg.events_per_frame) * 64;
    for (std::size_t b = 0; b < events.events.size(); b += chunk) {
      const std::size_t e = std::min(events.events.size(), b + chunk);
      EventList part{events.width, events.height,
                     std::vector<PhotonEvent>(events.events.begin() + b, events.events.begin() + e)};
      FrameStack stack = render_frames(part, cfg.events_per_frame, cfg.camera,
                                       splitmix64(seed ^ static_cast<std::uint64_t>(b)));
      EventList found = detect_events(stack, cfg.detection);
      detected.events.insert(detected.events.end(), found.events.begin(), found.events.end());
    }
    events = std::move(detected);
  }
  run.interferogram = histogram_events(events, cfg.grid);
  if (keep_events) run.events = std::move(events);
  return run;
}

SimConfig reference_config(const SimConfig& cfg) {
  SimConfig ref = cfg;
  ref.mask.kind = MaskKind::Flat;
  return ref;
}

std::uint64_t reference_seed(std::uint64_t seed) noexcept { return splitmix64(seed ^ 0x5265666572656e63ULL); }

}  // namespace holo
