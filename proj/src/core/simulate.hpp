#pragma once

#include <cstdint>
#include <optional>

#include "core/config.hpp"

namespace holo {

struct FieldPair {
  ComplexField unknown;
  ComplexField reference;
};

// Unknown beam with the configured mask and the reference arm (analytic
// Gaussian or pinhole-filtered copy of the unmasked beam), scaled by the
// amplitude ratio.
FieldPair build_fields(const SimConfig& cfg);

struct SimulationRun {
  IntensityMap intensity;
  Interferogram interferogram;
  std::optional<EventList> events;
};

// n_events is the expected number of signal photons; noise is added at the
// configured rates over exposure = n_events / signal_rate.
SimulationRun simulate(const SimConfig& cfg, double n_events, std::uint64_t seed, bool keep_events);

// Same configuration with a flat mask: the calibration run for the carrier phase.
SimConfig reference_config(const SimConfig& cfg);
std::uint64_t reference_seed(std::uint64_t seed) noexcept;

}  // namespace holo
