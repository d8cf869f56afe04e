#include "holo/holo.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <string>

#include "json.hpp"

#include "core/config.hpp"
#include "core/eventfile.hpp"
#include "core/mapfile.hpp"
#include "core/simulate.hpp"
#include "core/stats.hpp"

struct holo_config {
  holo::SimConfig cfg;
};
struct holo_map {
  holo::MapFile map;
};
struct holo_events {
  holo::EventList list;
};
struct holo_recon {
  holo::ReconstructionResult result;
};
struct holo_profile {
  holo::ProfileResult profile;
  holo::GridSpec grid;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_stage;

constexpr const char* kVersion = "1.0.0";

holo_status status_of(holo::ErrorCode code) {
  using holo::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return HOLO_E_INVALID_ARGUMENT;
    case ErrorCode::Configuration: return HOLO_E_CONFIG;
    case ErrorCode::Dimension: return HOLO_E_DIMENSION;
    case ErrorCode::NoSideband: return HOLO_E_NO_SIDEBAND;
    case ErrorCode::EmptyReference: return HOLO_E_EMPTY_REFERENCE;
    case ErrorCode::Selection: return HOLO_E_SELECTION;
    case ErrorCode::FitFailure: return HOLO_E_FIT;
    case ErrorCode::EmptyValidity: return HOLO_E_EMPTY_VALIDITY;
    case ErrorCode::Pipeline: return HOLO_E_PIPELINE;
    case ErrorCode::Io: return HOLO_E_IO;
    case ErrorCode::Format: return HOLO_E_FORMAT;
  }
  return HOLO_E_INTERNAL;
}

template <typename Fn>
holo_status guarded(Fn&& fn) {
  g_error.clear();
  g_stage.clear();
  try {
    fn();
    return HOLO_OK;
  } catch (const holo::Error& e) {
    g_error = e.what();
    g_stage = e.stage();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return HOLO_E_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    return HOLO_E_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw holo::Error(holo::ErrorCode::InvalidArgument, what);
}

size_t copy_out(const std::string& s, char* buf, size_t len) {
  if (buf && len > 0) {
    const size_t n = std::min(len - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
  return s.size() + 1;
}

holo::GridSpec grid_of(const holo::MapFile& m) {
  holo::GridSpec g;
  g.width = m.width();
  g.height = m.height();
  g.pitch = m.pitch;
  return g;
}

holo::Interferogram to_interferogram(const holo::MapFile& m) {
  holo::Interferogram out{grid_of(m), holo::Array2D<std::uint32_t>(m.width(), m.height()), 0};
  if (const auto* u = std::get_if<holo::Array2D<std::uint32_t>>(&m.data)) {
    out.counts = *u;
  } else if (const auto* r = std::get_if<holo::RealMap>(&m.data)) {
    for (std::size_t k = 0; k < r->size(); ++k) {
      const double v = (*r)[k];
      if (!(v >= 0.0) || v != std::floor(v) || v > 4294967295.0)
        throw holo::Error(holo::ErrorCode::Format, "interferogram map holds non-count values");
      out.counts[k] = static_cast<std::uint32_t>(v);
    }
  } else {
    throw holo::Error(holo::ErrorCode::Format, "interferogram map must be u32 or f64 counts");
  }
  return out;
}

const holo::RealMap& real_of(const holo::MapFile& m, const char* what) {
  const auto* r = std::get_if<holo::RealMap>(&m.data);
  if (!r) throw holo::Error(holo::ErrorCode::Format, std::string(what) + " map must be f64");
  return *r;
}

holo::ReconParams params_of(const holo_recon_params* p) {
  holo::ReconParams out;
  if (!p) return out;
  require(p->dc_exclusion_radius >= 0.0, "dc_exclusion_radius must be >= 0");
  require(p->radius_fraction > 0.0 && p->radius_fraction <= 1.0, "radius_fraction must be in (0, 1]");
  require(p->taper_fraction >= 0.0 && p->taper_fraction <= 1.0, "taper_fraction must be in [0, 1]");
  require(p->amplitude_floor >= 0.0 && p->amplitude_floor < 1.0, "amplitude_floor must be in [0, 1)");
  out.dc_exclusion_radius = p->dc_exclusion_radius;
  out.radius_fraction = p->radius_fraction;
  out.taper_fraction = p->taper_fraction;
  out.amplitude_floor = p->amplitude_floor;
  out.conjugate = p->conjugate != 0;
  if (p->has_sideband) {
    out.sideband = holo::default_selection({p->sideband_kx, p->sideband_ky}, out);
  }
  return out;
}

holo_map* wrap_real(holo::RealMap data, const holo::GridSpec& g, const char* channel) {
  auto m = std::make_unique<holo_map>();
  m->map.channel = channel;
  m->map.pitch = g.pitch;
  m->map.data = std::move(data);
  return m.release();
}

}  // namespace

extern "C" {

const char* holo_version(void) { return kVersion; }
const char* holo_last_error(void) { return g_error.c_str(); }
const char* holo_last_error_stage(void) { return g_stage.c_str(); }

const char* holo_status_name(holo_status status) {
  switch (status) {
    case HOLO_OK: return "ok";
    case HOLO_E_INVALID_ARGUMENT: return "invalid argument";
    case HOLO_E_CONFIG: return "configuration error";
    case HOLO_E_DIMENSION: return "dimension error";
    case HOLO_E_NO_SIDEBAND: return "no sideband";
    case HOLO_E_EMPTY_REFERENCE: return "empty reference";
    case HOLO_E_SELECTION: return "selection error";
    case HOLO_E_FIT: return "fit failure";
    case HOLO_E_EMPTY_VALIDITY: return "empty validity";
    case HOLO_E_PIPELINE: return "pipeline error";
    case HOLO_E_IO: return "I/O error";
    case HOLO_E_FORMAT: return "format error";
    case HOLO_E_INTERNAL: return "internal error";
  }
  return "unknown";
}

holo_status holo_config_parse(const char* text, holo_config** out) {
  return guarded([&] {
    require(text && out, "holo_config_parse: null argument");
    *out = new holo_config{holo::parse_config(text)};
  });
}

holo_status holo_config_load(const char* path, holo_config** out) {
  return guarded([&] {
    require(path && out, "holo_config_load: null argument");
    *out = new holo_config{holo::load_config(path)};
  });
}

void holo_config_free(holo_config* cfg) { delete cfg; }

uint64_t holo_config_hash(const holo_config* cfg) { return cfg ? holo::fnv1a64(cfg->cfg.source_text) : 0; }

holo_status holo_config_reference(const holo_config* cfg, holo_config** out) {
  return guarded([&] {
    require(cfg && out, "holo_config_reference: null argument");
    *out = new holo_config{holo::reference_config(cfg->cfg)};
  });
}

size_t holo_config_key_count(void) { return holo::config_keys().size(); }

const char* holo_config_key(size_t index) {
  const auto& keys = holo::config_keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

size_t holo_config_json(const holo_config* cfg, char* buf, size_t len) {
  nlohmann::json j = nlohmann::json::object();
  if (cfg)
    for (const auto& [k, v] : cfg->cfg.entries) j[k] = v;
  return copy_out(j.dump(), buf, len);
}

holo_status holo_map_create(holo_dtype dtype, uint32_t width, uint32_t height, double pitch,
                            const char* channel, holo_map** out) {
  return guarded([&] {
    require(out != nullptr, "holo_map_create: null output");
    require(width > 0 && height > 0 && width <= 65536 && height <= 65536, "holo_map_create: bad size");
    auto m = std::make_unique<holo_map>();
    m->map.channel = channel ? channel : "";
    m->map.pitch = pitch;
    const int w = static_cast<int>(width), h = static_cast<int>(height);
    switch (dtype) {
      case HOLO_F64: m->map.data = holo::RealMap(w, h); break;
      case HOLO_C128: m->map.data = holo::ComplexMap(w, h); break;
      case HOLO_U32: m->map.data = holo::Array2D<std::uint32_t>(w, h); break;
      default: require(false, "holo_map_create: unknown dtype");
    }
    *out = m.release();
  });
}

holo_status holo_map_read(const char* path, holo_map** out) {
  return guarded([&] {
    require(path && out, "holo_map_read: null argument");
    *out = new holo_map{holo::read_map(path)};
  });
}

holo_status holo_map_write(const holo_map* map, const char* path) {
  return guarded([&] {
    require(map && path, "holo_map_write: null argument");
    holo::write_map(path, map->map);
  });
}

void holo_map_free(holo_map* map) { delete map; }
holo_dtype holo_map_dtype(const holo_map* map) { return static_cast<holo_dtype>(map->map.dtype()); }
uint32_t holo_map_width(const holo_map* map) { return static_cast<uint32_t>(map->map.width()); }
uint32_t holo_map_height(const holo_map* map) { return static_cast<uint32_t>(map->map.height()); }
double holo_map_pitch(const holo_map* map) { return map->map.pitch; }
const char* holo_map_channel(const holo_map* map) { return map->map.channel.c_str(); }

void* holo_map_data(holo_map* map) {
  return std::visit([](auto& a) -> void* { return a.data(); }, map->map.data);
}
const void* holo_map_data_const(const holo_map* map) {
  return std::visit([](const auto& a) -> const void* { return a.data(); }, map->map.data);
}

holo_status holo_events_read(const char* path, holo_events** out) {
  return guarded([&] {
    require(path && out, "holo_events_read: null argument");
    *out = new holo_events{holo::read_events(std::filesystem::path(path))};
  });
}

holo_status holo_events_write(const holo_events* events, const char* path, int precision) {
  return guarded([&] {
    require(events && path, "holo_events_write: null argument");
    holo::EventFileOptions opt;
    if (precision != 0) opt.precision = precision;
    holo::write_events(std::filesystem::path(path), events->list, opt);
  });
}

void holo_events_free(holo_events* events) { delete events; }
size_t holo_events_count(const holo_events* events) { return events ? events->list.events.size() : 0; }

holo_status holo_events_histogram(const holo_events* events, double pitch, holo_map** out, uint64_t* discarded) {
  return guarded([&] {
    require(events && out, "holo_events_histogram: null argument");
    holo::GridSpec g;
    g.width = events->list.width;
    g.height = events->list.height;
    g.pitch = pitch;
    auto hist = holo::histogram_events(events->list, g);
    auto m = std::make_unique<holo_map>();
    m->map.channel = "interferogram";
    m->map.pitch = pitch;
    m->map.data = std::move(hist.counts);
    if (discarded) *discarded = hist.discarded;
    *out = m.release();
  });
}

holo_status holo_simulate(const holo_config* cfg, double n_events, uint64_t seed, holo_events** events_out,
                          holo_map** interferogram_out) {
  return guarded([&] {
    require(cfg != nullptr, "holo_simulate: null config");
    auto run = holo::simulate(cfg->cfg, n_events, seed, events_out != nullptr);
    if (interferogram_out) {
      auto m = std::make_unique<holo_map>();
      m->map.channel = "interferogram";
      m->map.pitch = run.interferogram.grid.pitch;
      m->map.data = std::move(run.interferogram.counts);
      *interferogram_out = m.release();
    }
    if (events_out) *events_out = new holo_events{std::move(*run.events)};
  });
}

uint64_t holo_reference_seed(uint64_t seed) { return holo::reference_seed(seed); }

void holo_recon_params_default(holo_recon_params* params) {
  if (!params) return;
  const holo::ReconParams d;
  *params = holo_recon_params{d.dc_exclusion_radius, d.radius_fraction, d.taper_fraction,
                              d.amplitude_floor, 0, 0, 0.0, 0.0};
}

holo_status holo_reconstruct(const holo_map* interferogram, const holo_map* reference,
                             const holo_recon_params* params, holo_recon** out) {
  return guarded([&] {
    require(interferogram && out, "holo_reconstruct: null argument");
    const auto img = to_interferogram(interferogram->map);
    std::optional<holo::Interferogram> ref;
    if (reference) ref = to_interferogram(reference->map);
    *out = new holo_recon{holo::reconstruct(img, ref ? &*ref : nullptr, params_of(params))};
  });
}

void holo_recon_free(holo_recon* recon) { delete recon; }

holo_status holo_recon_phase(const holo_recon* recon, holo_map** out) {
  return guarded([&] {
    require(recon && out, "holo_recon_phase: null argument");
    *out = wrap_real(recon->result.phase, recon->result.grid, "phase");
  });
}

holo_status holo_recon_amplitude(const holo_recon* recon, holo_map** out) {
  return guarded([&] {
    require(recon && out, "holo_recon_amplitude: null argument");
    *out = wrap_real(recon->result.cross_amplitude, recon->result.grid, "cross_amplitude");
  });
}

holo_status holo_recon_dc(const holo_recon* recon, holo_map** out) {
  return guarded([&] {
    require(recon && out, "holo_recon_dc: null argument");
    *out = wrap_real(recon->result.dc_intensity, recon->result.grid, "dc_intensity");
  });
}

holo_status holo_recon_validity(const holo_recon* recon, holo_map** out) {
  return guarded([&] {
    require(recon && out, "holo_recon_validity: null argument");
    const auto& v = recon->result.validity;
    holo::Array2D<std::uint32_t> a(v.width(), v.height());
    for (std::size_t k = 0; k < v.size(); ++k) a[k] = v[k] ? 1u : 0u;
    auto m = std::make_unique<holo_map>();
    m->map.channel = "validity";
    m->map.pitch = recon->result.grid.pitch;
    m->map.data = std::move(a);
    *out = m.release();
  });
}

void holo_recon_sideband(const holo_recon* recon, double* kx, double* ky, double* radius, double* taper) {
  if (!recon) return;
  const auto& s = recon->result.sideband;
  if (kx) *kx = s.center.kx;
  if (ky) *ky = s.center.ky;
  if (radius) *radius = s.radius;
  if (taper) *taper = s.taper_width;
}

holo_status holo_recon_visibility(const holo_recon* recon, double* median, double* clip_fraction) {
  return guarded([&] {
    require(recon != nullptr, "holo_recon_visibility: null recon");
    const auto v = holo::visibility(recon->result);
    if (median) *median = v.summary;
    if (clip_fraction) *clip_fraction = v.clip_fraction;
  });
}

size_t holo_recon_summary_json(const holo_recon* recon, char* buf, size_t len) {
  if (!recon) return copy_out("{}", buf, len);
  const auto& r = recon->result;
  nlohmann::ordered_json j;
  j["sideband"] = {{"kx_rad_per_m", r.sideband.center.kx},
                   {"ky_rad_per_m", r.sideband.center.ky},
                   {"radius_rad_per_m", r.sideband.radius},
                   {"taper_rad_per_m", r.sideband.taper_width}};
  std::size_t valid = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < r.validity.size(); ++k) {
    if (!r.validity[k]) continue;
    ++valid;
    lo = std::min(lo, r.phase[k]);
    hi = std::max(hi, r.phase[k]);
  }
  j["valid_pixels"] = valid;
  if (valid) j["phase_range"] = {lo, hi};
  try {
    const auto v = holo::visibility(r);
    j["visibility"] = {{"median", v.summary}, {"clip_fraction", v.clip_fraction}};
  } catch (const holo::Error&) {
    j["visibility"] = nullptr;
  }
  j["offset_convention"] = r.offset_convention;
  return copy_out(j.dump(2), buf, len);
}

holo_status holo_bootstrap(const holo_map* interferogram, const holo_map* reference,
                           const holo_recon_params* params, int n_resamples, uint64_t seed,
                           holo_map** mean_out, holo_map** std_out) {
  return guarded([&] {
    require(interferogram != nullptr, "holo_bootstrap: null interferogram");
    const auto img = to_interferogram(interferogram->map);
    std::optional<holo::Interferogram> ref;
    if (reference) ref = to_interferogram(reference->map);
    holo::BootstrapOptions opt;
    opt.n_resamples = n_resamples;
    opt.seed = seed;
    auto u = holo::bootstrap(img, ref ? &*ref : nullptr, params_of(params), opt);
    if (mean_out) *mean_out = wrap_real(std::move(u.mean_phase), img.grid, "mean_phase");
    if (std_out) *std_out = wrap_real(std::move(u.std_phase), img.grid, "std_phase");
  });
}

holo_status holo_band_average(const holo_map* phase, const holo_map* std, holo_axis axis, int begin, int end,
                              holo_profile** out) {
  return guarded([&] {
    require(phase && out, "holo_band_average: null argument");
    const auto& ph = real_of(phase->map, "phase");
    const holo::RealMap* sd = nullptr;
    if (std) {
      sd = &real_of(std->map, "std");
      if (!sd->same_shape(ph)) throw holo::Error(holo::ErrorCode::Dimension, "phase and std shapes differ");
    }
    const auto ax = axis == HOLO_AXIS_ROWS ? holo::BandAxis::Rows : holo::BandAxis::Columns;
    if (begin < 0 || end < 0) {
      const auto [b, e] = holo::middle_band(ax == holo::BandAxis::Columns ? ph.width() : ph.height());
      begin = b;
      end = e;
    }
    const auto g = grid_of(phase->map);
    *out = new holo_profile{holo::band_average(ph, sd, g, ax, begin, end), g};
  });
}

holo_status holo_azimuthal_profile(const holo_map* phase, double center_x, double center_y, double r_inner,
                                   double r_outer, int n_bins, holo_profile** out) {
  return guarded([&] {
    require(phase && out, "holo_azimuthal_profile: null argument");
    const auto& ph = real_of(phase->map, "phase");
    if (center_x < 0 || center_y < 0) {
      center_x = ph.width() / 2;
      center_y = ph.height() / 2;
    }
    *out = new holo_profile{holo::azimuthal_profile(ph, center_x, center_y, r_inner, r_outer, n_bins),
                            grid_of(phase->map)};
  });
}

void holo_profile_free(holo_profile* profile) { delete profile; }
size_t holo_profile_length(const holo_profile* p) { return p ? p->profile.values.size() : 0; }

int holo_profile_sample(const holo_profile* p, size_t i, double* abscissa, double* value, double* error) {
  if (!p || i >= p->profile.values.size()) return 0;
  if (abscissa) *abscissa = p->profile.abscissa[i];
  if (value) *value = p->profile.values[i];
  if (error) *error = p->profile.errors[i];
  return p->profile.valid[i] ? 1 : 0;
}

int holo_profile_fit(const holo_profile* p, double* slope, double* slope_error, double* intercept,
                     double* residual_rms) {
  if (!p || !p->profile.fit) return 0;
  const auto& f = *p->profile.fit;
  if (slope) *slope = f.slope;
  if (slope_error) *slope_error = f.slope_error;
  if (intercept) *intercept = f.intercept;
  if (residual_rms) *residual_rms = f.residual_rms;
  return 1;
}

holo_status holo_profile_write_csv(const holo_profile* p, const char* path) {
  return guarded([&] {
    require(p && path, "holo_profile_write_csv: null argument");
    std::FILE* f = std::fopen(path, "wb");
    if (!f) throw holo::Error(holo::ErrorCode::Io, std::string("cannot open ") + path);
    std::fputs("abscissa,value,error\n", f);
    const auto& pr = p->profile;
    for (std::size_t i = 0; i < pr.values.size(); ++i) {
      if (!pr.valid[i]) continue;
      std::fprintf(f, "%.10g,%.10g,%.10g\n", pr.abscissa[i], pr.values[i], pr.errors[i]);
    }
    const bool ok = std::fclose(f) == 0;
    if (!ok) throw holo::Error(holo::ErrorCode::Io, std::string("failed writing ") + path);
  });
}

holo_status holo_compare_theory(const holo_profile* profile, const holo_config* model, holo_axis axis,
                                double* rms, double* max_error, double* offset) {
  return guarded([&] {
    require(profile && model, "holo_compare_theory: null argument");
    const auto ax = axis == HOLO_AXIS_ROWS ? holo::BandAxis::Rows : holo::BandAxis::Columns;
    const auto c = holo::compare_theory(profile->profile, model->cfg.mask, ax);
    if (c.n_points == 0) throw holo::Error(holo::ErrorCode::EmptyValidity, "profile has no valid samples");
    if (rms) *rms = c.rms_error;
    if (max_error) *max_error = c.max_error;
    if (offset) *offset = c.offset_fitted;
  });
}

}  // extern "C"
