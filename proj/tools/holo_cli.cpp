// Command-line front end. Talks to the library only through holo.h.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "holo/holo.h"
#include "json.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kPipeline = 2, kIo = 3 };

struct Failure {
  int exit_code;
  std::string message;
};

int exit_for(holo_status s) {
  switch (s) {
    case HOLO_OK: return kOk;
    case HOLO_E_INVALID_ARGUMENT:
    case HOLO_E_CONFIG: return kUsage;
    case HOLO_E_IO:
    case HOLO_E_FORMAT:
    case HOLO_E_DIMENSION: return kIo;
    default: return kPipeline;
  }
}

void check(holo_status s, const std::string& what) {
  if (s == HOLO_OK) return;
  std::string msg = what + ": " + holo_status_name(s) + ": " + holo_last_error();
  const std::string stage = holo_last_error_stage();
  if (!stage.empty()) msg += " (stage: " + stage + ")";
  throw Failure{exit_for(s), msg};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using MapPtr = std::unique_ptr<holo_map, Deleter<holo_map, holo_map_free>>;
using ConfigPtr = std::unique_ptr<holo_config, Deleter<holo_config, holo_config_free>>;
using EventsPtr = std::unique_ptr<holo_events, Deleter<holo_events, holo_events_free>>;
using ReconPtr = std::unique_ptr<holo_recon, Deleter<holo_recon, holo_recon_free>>;
using ProfilePtr = std::unique_ptr<holo_profile, Deleter<holo_profile, holo_profile_free>>;

MapPtr read_map(const std::string& path) {
  holo_map* m = nullptr;
  check(holo_map_read(path.c_str(), &m), "reading " + path);
  return MapPtr(m);
}

void write_map(const holo_map* m, const std::string& path) { check(holo_map_write(m, path.c_str()), "writing " + path); }

ConfigPtr load_config(const std::string& path) {
  holo_config* c = nullptr;
  check(holo_config_load(path.c_str(), &c), "config " + path);
  return ConfigPtr(c);
}

std::string config_json(const holo_config* c) {
  const size_t n = holo_config_json(c, nullptr, 0);
  std::string s(n, '\0');
  holo_config_json(c, s.data(), n);
  s.resize(n - 1);
  return s;
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Failure{kIo, "cannot write " + path};
  f << text;
}

std::pair<double, double> parse_pair(const std::string& s, const char* what) {
  const auto c = s.find(',');
  try {
    if (c == std::string::npos) throw std::invalid_argument(s);
    return {std::stod(s.substr(0, c)), std::stod(s.substr(c + 1))};
  } catch (const std::exception&) {
    throw Failure{kUsage, std::string(what) + " expects 'a,b'"};
  }
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::uint64_t seed = 1;
  double events = 1e7;
  std::string out;
  std::string events_out;
  std::string ref_out;
  std::string manifest;
  int precision = 9;
};

void cmd_simulate(const SimulateArgs& a) {
  if (a.out.empty() && a.events_out.empty())
    throw Failure{kUsage, "simulate: give --out and/or --events-out"};
  auto cfg = load_config(a.config);

  holo_events* ev = nullptr;
  holo_map* img = nullptr;
  check(holo_simulate(cfg.get(), a.events, a.seed, a.events_out.empty() ? nullptr : &ev,
                      a.out.empty() ? nullptr : &img),
        "simulate");
  EventsPtr events(ev);
  MapPtr interferogram(img);

  nlohmann::ordered_json manifest;
  manifest["tool"] = "holo";
  manifest["version"] = holo_version();
  manifest["config"] = a.config;
  manifest["config_hash"] = "fnv1a64:" + hex64(holo_config_hash(cfg.get()));
  manifest["config_entries"] = nlohmann::ordered_json::parse(config_json(cfg.get()));
  manifest["seed"] = a.seed;
  manifest["events_expected"] = a.events;
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();

  if (interferogram) {
    write_map(interferogram.get(), a.out);
    const auto* counts = static_cast<const std::uint32_t*>(holo_map_data_const(interferogram.get()));
    std::uint64_t total = 0;
    const std::size_t n = static_cast<std::size_t>(holo_map_width(interferogram.get())) *
                          holo_map_height(interferogram.get());
    for (std::size_t k = 0; k < n; ++k) total += counts[k];
    outputs["interferogram"] = {{"path", a.out}, {"total_counts", total}};
    std::printf("interferogram %s: %" PRIu64 " counts\n", a.out.c_str(), total);
  }
  if (events) {
    check(holo_events_write(events.get(), a.events_out.c_str(), a.precision), "writing " + a.events_out);
    outputs["events"] = {{"path", a.events_out}, {"count", holo_events_count(events.get())}};
    std::printf("events %s: %zu\n", a.events_out.c_str(), holo_events_count(events.get()));
  }
  if (!a.ref_out.empty()) {
    holo_config* rc = nullptr;
    check(holo_config_reference(cfg.get(), &rc), "reference config");
    ConfigPtr ref_cfg(rc);
    holo_map* rimg = nullptr;
    const std::uint64_t rseed = holo_reference_seed(a.seed);
    check(holo_simulate(ref_cfg.get(), a.events, rseed, nullptr, &rimg), "simulate reference");
    MapPtr ref(rimg);
    write_map(ref.get(), a.ref_out);
    outputs["reference"] = {{"path", a.ref_out}, {"seed", rseed}};
    std::printf("reference %s\n", a.ref_out.c_str());
  }
  manifest["outputs"] = outputs;
  const std::string manifest_path =
      !a.manifest.empty() ? a.manifest : (!a.out.empty() ? a.out : a.events_out) + ".manifest.json";
  write_text(manifest_path, manifest.dump(2) + "\n");
}

// ---- reconstruct ----------------------------------------------------------

struct ReconArgs {
  std::string in;
  std::string ref = "none";
  std::string out;
  double radius_fraction = 0.5;
  double taper_fraction = 0.1;
  double amplitude_floor = 0.05;
  double dc_exclusion = 0.0;  // rad/px
  std::string sideband;       // "kx,ky" in rad/px
  bool conjugate = false;
};

holo_recon_params recon_params(const ReconArgs& a, double pitch) {
  holo_recon_params p;
  holo_recon_params_default(&p);
  p.radius_fraction = a.radius_fraction;
  p.taper_fraction = a.taper_fraction;
  p.amplitude_floor = a.amplitude_floor;
  p.dc_exclusion_radius = a.dc_exclusion / pitch;
  p.conjugate = a.conjugate ? 1 : 0;
  if (!a.sideband.empty()) {
    const auto [kx, ky] = parse_pair(a.sideband, "--sideband");
    p.has_sideband = 1;
    p.sideband_kx = kx / pitch;
    p.sideband_ky = ky / pitch;
  }
  return p;
}

void cmd_reconstruct(const ReconArgs& a) {
  auto img = read_map(a.in);
  MapPtr ref;
  if (a.ref != "none" && !a.ref.empty()) ref = read_map(a.ref);
  const auto params = recon_params(a, holo_map_pitch(img.get()));

  holo_recon* r = nullptr;
  check(holo_reconstruct(img.get(), ref.get(), &params, &r), "reconstruct");
  ReconPtr recon(r);

  holo_map* m = nullptr;
  check(holo_recon_phase(recon.get(), &m), "phase");
  MapPtr phase(m);
  check(holo_recon_amplitude(recon.get(), &m), "amplitude");
  MapPtr amp(m);
  check(holo_recon_validity(recon.get(), &m), "validity");
  MapPtr valid(m);
  check(holo_recon_dc(recon.get(), &m), "dc");
  MapPtr dc(m);
  write_map(phase.get(), a.out + "_phase.hg2d");
  write_map(amp.get(), a.out + "_amplitude.hg2d");
  write_map(valid.get(), a.out + "_validity.hg2d");
  write_map(dc.get(), a.out + "_dc.hg2d");

  const size_t n = holo_recon_summary_json(recon.get(), nullptr, 0);
  std::string summary(n, '\0');
  holo_recon_summary_json(recon.get(), summary.data(), n);
  summary.resize(n - 1);
  write_text(a.out + "_summary.json", summary + "\n");
  std::printf("%s\n", summary.c_str());
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  std::string mode;
  std::string phase;
  std::string std;
  std::string in;
  std::string ref = "none";
  std::string csv;
  std::string theory;
  std::string out;
  int begin = -1;
  int end = -1;
  std::string center;
  double r_inner = 10.0;
  double r_outer = 40.0;
  int bins = 36;
  int n = 1000;
  std::uint64_t seed = 1;
};

void print_profile(const holo_profile* p) {
  std::printf("%14s %14s %14s\n", "abscissa", "value", "error");
  for (size_t i = 0; i < holo_profile_length(p); ++i) {
    double x, v, e;
    if (holo_profile_sample(p, i, &x, &v, &e)) std::printf("%14.6g %14.6f %14.6f\n", x, v, e);
  }
}

void cmd_analyze(const AnalyzeArgs& a) {
  if (a.mode == "column" || a.mode == "row") {
    if (a.phase.empty()) throw Failure{kUsage, "analyze: --phase is required"};
    auto phase = read_map(a.phase);
    MapPtr sd;
    if (!a.std.empty()) sd = read_map(a.std);
    if (sd && (holo_map_width(sd.get()) != holo_map_width(phase.get()) ||
               holo_map_height(sd.get()) != holo_map_height(phase.get())))
      throw Failure{kIo, "analyze: phase and std shapes differ"};
    const holo_axis axis = a.mode == "column" ? HOLO_AXIS_COLUMNS : HOLO_AXIS_ROWS;
    holo_profile* p = nullptr;
    check(holo_band_average(phase.get(), sd.get(), axis, a.begin, a.end, &p), "band average");
    ProfilePtr prof(p);
    print_profile(prof.get());
    if (!a.csv.empty()) check(holo_profile_write_csv(prof.get(), a.csv.c_str()), "writing " + a.csv);
    if (!a.theory.empty()) {
      auto model = load_config(a.theory);
      double rms, mx, off;
      check(holo_compare_theory(prof.get(), model.get(), axis, &rms, &mx, &off), "compare theory");
      std::printf("theory: rms %.6f rad  max %.6f rad  offset %.6f rad\n", rms, mx, off);
    }
  } else if (a.mode == "azimuthal") {
    if (a.phase.empty()) throw Failure{kUsage, "analyze: --phase is required"};
    auto phase = read_map(a.phase);
    double cx = -1, cy = -1;
    if (!a.center.empty()) std::tie(cx, cy) = parse_pair(a.center, "--center");
    holo_profile* p = nullptr;
    check(holo_azimuthal_profile(phase.get(), cx, cy, a.r_inner, a.r_outer, a.bins, &p), "azimuthal profile");
    ProfilePtr prof(p);
    print_profile(prof.get());
    if (!a.csv.empty()) check(holo_profile_write_csv(prof.get(), a.csv.c_str()), "writing " + a.csv);
    double slope, err, icpt, res;
    if (!holo_profile_fit(prof.get(), &slope, &err, &icpt, &res))
      throw Failure{kPipeline, "azimuthal fit failed: too few valid bins"};
    std::printf("slope %.6f +/- %.6f  intercept %.6f  residual %.6f\n", slope, err, icpt, res);
  } else if (a.mode == "visibility") {
    if (a.in.empty()) throw Failure{kUsage, "analyze: --in is required"};
    auto img = read_map(a.in);
    MapPtr ref;
    if (a.ref != "none" && !a.ref.empty()) ref = read_map(a.ref);
    holo_recon_params params;
    holo_recon_params_default(&params);
    holo_recon* r = nullptr;
    check(holo_reconstruct(img.get(), ref.get(), &params, &r), "reconstruct");
    ReconPtr recon(r);
    double med, clip;
    check(holo_recon_visibility(recon.get(), &med, &clip), "visibility");
    std::printf("visibility %.6f  clip_fraction %.6f\n", med, clip);
  } else if (a.mode == "bootstrap") {
    if (a.in.empty() || a.out.empty()) throw Failure{kUsage, "analyze bootstrap: --in and --out are required"};
    auto img = read_map(a.in);
    MapPtr ref;
    if (a.ref != "none" && !a.ref.empty()) ref = read_map(a.ref);
    holo_recon_params params;
    holo_recon_params_default(&params);
    holo_map *mean = nullptr, *sd = nullptr;
    check(holo_bootstrap(img.get(), ref.get(), &params, a.n, a.seed, &mean, &sd), "bootstrap");
    MapPtr mean_map(mean), std_map(sd);
    write_map(mean_map.get(), a.out + "_mean.hg2d");
    write_map(std_map.get(), a.out + "_std.hg2d");
    const auto* s = static_cast<const double*>(holo_map_data_const(std_map.get()));
    const std::size_t n = static_cast<std::size_t>(holo_map_width(std_map.get())) * holo_map_height(std_map.get());
    std::vector<double> finite;
    for (std::size_t k = 0; k < n; ++k)
      if (std::isfinite(s[k])) finite.push_back(s[k]);
    std::sort(finite.begin(), finite.end());
    const double med = finite.empty() ? 0.0 : finite[finite.size() / 2];
    std::printf("bootstrap n=%d seed=%" PRIu64 ": %zu pixels, median std %.6f rad, max std %.6f rad\n", a.n,
                a.seed, finite.size(), med, finite.empty() ? 0.0 : finite.back());
  } else {
    throw Failure{kUsage, "analyze: unknown mode '" + a.mode + "'"};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"holo: photon-counting off-axis holography simulator and reconstructor"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(holo_version()));

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "simulate an interferogram from a key=value config");
  s->add_option("config", sim.config, "config file")->required();
  s->add_option("--seed", sim.seed, "RNG seed");
  s->add_option("--events", sim.events, "expected number of signal photons");
  s->add_option("--out", sim.out, "interferogram map (HG2D)");
  s->add_option("--events-out", sim.events_out, "event list (text)");
  s->add_option("--ref-out", sim.ref_out, "also simulate the no-mask calibration run");
  s->add_option("--manifest", sim.manifest, "run manifest path (default <out>.manifest.json)");
  s->add_option("--precision", sim.precision, "significant digits in the event list")->check(CLI::Range(6, 17));

  ReconArgs rec;
  auto* r = app.add_subcommand("reconstruct", "Fourier off-axis reconstruction");
  r->add_option("--in", rec.in, "interferogram map")->required();
  r->add_option("--ref", rec.ref, "calibration interferogram or 'none'");
  r->add_option("--out", rec.out, "output prefix")->required();
  r->add_option("--radius-fraction", rec.radius_fraction, "sideband radius / carrier distance");
  r->add_option("--taper-fraction", rec.taper_fraction, "raised-cosine width / radius");
  r->add_option("--amplitude-floor", rec.amplitude_floor, "validity floor relative to max |p|");
  r->add_option("--dc-exclusion", rec.dc_exclusion, "DC exclusion radius in rad/px (0 = default)");
  r->add_option("--sideband", rec.sideband, "explicit sideband center kx,ky in rad/px");
  r->add_flag("--conjugate", rec.conjugate, "use the mirrored sideband");

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "profiles, visibility and bootstrap uncertainty");
  a->add_option("--mode", an.mode, "column|row|azimuthal|visibility|bootstrap")->required();
  a->add_option("--phase", an.phase, "phase map");
  a->add_option("--std", an.std, "std map");
  a->add_option("--in", an.in, "interferogram (visibility, bootstrap)");
  a->add_option("--ref", an.ref, "calibration interferogram or 'none'");
  a->add_option("--csv", an.csv, "write abscissa,value,error CSV");
  a->add_option("--theory", an.theory, "config whose mask is compared with the profile");
  a->add_option("--out", an.out, "output prefix (bootstrap)");
  a->add_option("--begin", an.begin, "first line of the band (default middle 50)");
  a->add_option("--end", an.end, "one past the last line of the band");
  a->add_option("--center", an.center, "azimuthal center x,y in pixels (default grid center)");
  a->add_option("--r-inner", an.r_inner, "annulus inner radius, px");
  a->add_option("--r-outer", an.r_outer, "annulus outer radius, px");
  a->add_option("--bins", an.bins, "azimuthal bins");
  a->add_option("-n,--resamples", an.n, "bootstrap resamples");
  a->add_option("--seed", an.seed, "bootstrap seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*s) cmd_simulate(sim);
    else if (*r) cmd_reconstruct(rec);
    else if (*a) cmd_analyze(an);
  } catch (const Failure& f) {
    std::fprintf(stderr, "holo: %s\n", f.message.c_str());
    return f.exit_code;
  }
  return kOk;
}
