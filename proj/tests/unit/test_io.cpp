#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/eventfile.hpp"
#include "core/field.hpp"
#include "core/mapfile.hpp"
#include "core/photonsim.hpp"
#include "core/simulate.hpp"

using namespace holo;

namespace {

ErrorCode code_of(auto&& fn, std::string* what = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Pipeline;
}

template <typename T>
bool same_bytes(const Array2D<T>& a, const Array2D<T>& b) {
  return a.same_shape(b) && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("holo_test_" + name);
}

// Little-endian byte builder used as an independent oracle for the layout.
struct Bytes {
  std::string s;
  template <typename T>
  void le(T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t k = 0; k < sizeof(T); ++k) s.push_back(static_cast<char>(b[k]));  // host is little-endian
  }
};

}  // namespace

TEST(MapFile, GoldenLayout) {
  MapFile m;
  m.channel = "phase";
  m.pitch = 1e-5;
  Array2D<std::uint32_t> c(3, 2);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = static_cast<std::uint32_t>(0x01020300u + k);
  m.data = c;

  Bytes want;
  want.s = "HG2D";
  want.le<std::uint16_t>(1);
  want.le<std::uint16_t>(2);
  want.le<std::uint32_t>(3);
  want.le<std::uint32_t>(2);
  want.le<double>(1e-5);
  want.le<std::uint16_t>(5);
  want.s += "phase";
  for (std::size_t k = 0; k < c.size(); ++k) want.le<std::uint32_t>(c[k]);
  EXPECT_EQ(encode_map(m), want.s);
}

TEST(MapFile, RoundTripAllDtypesBitwise) {
  RealMap r(5, 3);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = std::ldexp(1.0 + k, static_cast<int>(k) - 7) - 3.0;
  r[0] = std::numeric_limits<double>::quiet_NaN();
  r[1] = -0.0;
  r[2] = std::numeric_limits<double>::infinity();
  r[3] = std::numeric_limits<double>::denorm_min();
  ComplexMap z(2, 4);
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = {0.1 * k, -1.0 / (k + 1)};
  Array2D<std::uint32_t> u(4, 4);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = 0xFFFFFFFFu - static_cast<std::uint32_t>(k * 977);

  MapFile a{"real", 1.25e-5, r};
  MapFile b{"complex \xc3\xa9", 2e-6, z};
  MapFile c{"", 0.0, u};
  for (const MapFile* m : {&a, &b, &c}) {
    const auto back = decode_map(encode_map(*m));
    EXPECT_EQ(back.channel, m->channel);
    EXPECT_EQ(std::memcmp(&back.pitch, &m->pitch, sizeof(double)), 0);
    ASSERT_EQ(back.dtype(), m->dtype());
    EXPECT_EQ(encode_map(back), encode_map(*m));
  }
  EXPECT_TRUE(same_bytes(std::get<RealMap>(decode_map(encode_map(a)).data), r));
  EXPECT_TRUE(same_bytes(std::get<ComplexMap>(decode_map(encode_map(b)).data), z));
  EXPECT_TRUE(same_bytes(std::get<Array2D<std::uint32_t>>(decode_map(encode_map(c)).data), u));

  const auto path = temp_path("map.hg2d");
  write_map(path, a);
  EXPECT_EQ(encode_map(read_map(path)), encode_map(a));
  std::filesystem::remove(path);
}

TEST(MapFile, RejectsMalformedInput) {
  MapFile m{"x", 1e-5, RealMap(2, 2, 1.0)};
  const std::string good = encode_map(m);
  EXPECT_EQ(code_of([&] { decode_map(good + "!"); }), ErrorCode::Format);
  EXPECT_EQ(code_of([&] { decode_map(good.substr(0, good.size() - 1)); }), ErrorCode::Format);
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_EQ(code_of([&] { decode_map(bad); }), ErrorCode::Format);
  bad = good;
  bad[6] = 9;  // dtype
  EXPECT_EQ(code_of([&] { decode_map(bad); }), ErrorCode::Format);
  bad = good;
  bad[4] = 2;  // version
  EXPECT_EQ(code_of([&] { decode_map(bad); }), ErrorCode::Format);
  EXPECT_EQ(code_of([&] { decode_map(""); }), ErrorCode::Format);
  EXPECT_EQ(code_of([&] { read_map(temp_path("does_not_exist.hg2d")); }), ErrorCode::Io);
}

TEST(EventFile, RoundTripAtDefaultPrecision) {
  GridSpec g;
  g.width = g.height = 64;
  const auto u = gaussian_field(g, 150e-6);
  const auto i = interfere(u, u, TiltSpec{1e5, 0.0, 0.0});
  NoiseSpec n;
  n.exposure = 50.0;
  const auto ev = add_noise(sample_events(i, 2e4, 3), n, i, 3);

  std::stringstream ss;
  write_events(ss, ev);
  const auto back = read_events(ss);
  ASSERT_EQ(back.events.size(), ev.events.size());
  EXPECT_EQ(back.width, 64);
  EXPECT_EQ(back.height, 64);
  for (std::size_t k = 0; k < ev.events.size(); ++k) {
    EXPECT_NEAR(back.events[k].x, ev.events[k].x, 1e-8 * 64);
    EXPECT_NEAR(back.events[k].y, ev.events[k].y, 1e-8 * 64);
    EXPECT_EQ(back.events[k].kind, ev.events[k].kind);
  }
  EXPECT_EQ(histogram_events(back, g).counts, histogram_events(ev, g).counts);

  // rewriting parsed events reproduces the file byte for byte
  std::stringstream again;
  write_events(again, back);
  EXPECT_EQ(again.str(), ss.str());
}

TEST(EventFile, SixDigitsKeepHistogramWithinOneCount) {
  GridSpec g;
  g.width = g.height = 512;
  const auto u = gaussian_field(g, 1e-3);
  const auto ev = sample_events(interfere(u, u, TiltSpec{1e5, 1e5, 0.0}), 1e5, 8);
  std::stringstream ss;
  write_events(ss, ev, EventFileOptions{6, false});
  const auto back = read_events(ss);
  const auto a = histogram_events(ev, g);
  const auto b = histogram_events(back, g);
  EXPECT_EQ(b.total(), a.total());
  EXPECT_EQ(b.discarded, 0u);
  for (std::size_t k = 0; k < a.counts.size(); ++k)
    ASSERT_LE(std::abs(static_cast<long>(a.counts[k]) - static_cast<long>(b.counts[k])), 1);
  for (const auto& e : back.events) EXPECT_EQ(e.kind, EventKind::Signal);
  EXPECT_THROW(write_events(ss, ev, EventFileOptions{5, true}), Error);
}

TEST(EventFile, CoordinateJustBelowEdgeStaysInBounds) {
  EventList ev{512, 512, {{std::nextafter(512.0, 0.0), 511.9999999}}};
  std::stringstream ss;
  write_events(ss, ev, EventFileOptions{6, true});
  const auto back = read_events(ss);
  EXPECT_LT(back.events[0].x, 512.0);
  EXPECT_LT(back.events[0].y, 512.0);
}

TEST(EventFile, RejectsMalformedInput) {
  auto parse = [](const std::string& text) {
    std::stringstream ss(text);
    return read_events(ss);
  };
  EXPECT_EQ(parse("# holo-events v1 width=4 height=2\n1.5,0.5,s\n3.9,1.2,d\n0,0,a\n").events.size(), 3u);
  EXPECT_EQ(code_of([&] { parse(""); }), ErrorCode::Format);
  EXPECT_EQ(code_of([&] { parse("x,y\n1,1\n"); }), ErrorCode::Format);
  EXPECT_EQ(code_of([&] { parse("# holo-events v1 width=4 height=2\n4.0,0.5\n"); }), ErrorCode::Format);
  EXPECT_EQ(code_of([&] { parse("# holo-events v1 width=4 height=2\n1.0\n"); }), ErrorCode::Format);
  EXPECT_EQ(code_of([&] { parse("# holo-events v1 width=4 height=2\n1.0,abc\n"); }), ErrorCode::Format);
  EXPECT_EQ(code_of([&] { parse("# holo-events v1 width=4 height=2\n1.0,1.0,q\n"); }), ErrorCode::Format);
}

TEST(Config, ParsesUnitsAndDefaults) {
  const auto c = parse_config(
      "# lens run\n"
      "mask.kind = quadratic1d\n"
      "grid.size=256   # smaller grid\n"
      "grid.pitch_um = 12.5\n"
      "tilt.a1 = 100\n"
      "tilt.a2 = -50\n"
      "noise.dark_hz = 0\n"
      "beam.waist_um = 300\n"
      "reference.mode = pinhole\n"
      "reference.pinhole_offset = 1.5, -2\n");
  EXPECT_EQ(c.mask.kind, MaskKind::Quadratic1D);
  EXPECT_DOUBLE_EQ(c.mask.focal_length, 58e-3);
  EXPECT_DOUBLE_EQ(c.mask.wavelength, 810e-9);
  EXPECT_EQ(c.grid.width, 256);
  EXPECT_DOUBLE_EQ(c.grid.pitch, 12.5e-6);
  EXPECT_DOUBLE_EQ(c.tilt.a1, 1e5);
  EXPECT_DOUBLE_EQ(c.tilt.a2, -5e4);
  EXPECT_EQ(c.noise.dark_rate, 0.0);
  EXPECT_EQ(c.noise.accidental_rate, 3.0);
  EXPECT_DOUBLE_EQ(c.waist, 300e-6);
  EXPECT_EQ(c.reference_mode, ReferenceMode::Pinhole);
  EXPECT_DOUBLE_EQ(c.pinhole_offset_x, 1.5e3);
  EXPECT_DOUBLE_EQ(c.pinhole_offset_y, -2e3);
  EXPECT_EQ(c.entries.size(), 9u);

  EXPECT_DOUBLE_EQ(parse_config("mask.kind=quadratic2d\n").mask.focal_length, 125e-3);
  EXPECT_EQ(parse_config("mask.kind=spiral\n").mask.charge, 1);
  EXPECT_EQ(parse_config("").mask.kind, MaskKind::Flat);
}

TEST(Config, UnknownKeyListsValidKeys) {
  std::string what;
  EXPECT_EQ(code_of([] { parse_config("mask.knd = spiral\n"); }, &what), ErrorCode::Configuration);
  EXPECT_NE(what.find("mask.knd"), std::string::npos);
  for (const auto& k : config_keys()) EXPECT_NE(what.find(k), std::string::npos) << k;
}

TEST(Config, RejectsBadValues) {
  EXPECT_EQ(code_of([] { parse_config("tilt.a1 = 400\n"); }), ErrorCode::Configuration);  // beyond Nyquist
  EXPECT_EQ(code_of([] { parse_config("grid.size = 500\n"); }), ErrorCode::Configuration);
  EXPECT_EQ(code_of([] { parse_config("mask.kind = cubic\n"); }), ErrorCode::Configuration);
  EXPECT_EQ(code_of([] { parse_config("mask.charge = 1.5\n"); }), ErrorCode::Configuration);
  EXPECT_EQ(code_of([] { parse_config("noise.dark_hz = fast\n"); }), ErrorCode::Configuration);
  EXPECT_EQ(code_of([] { parse_config("noise.dark_hz = -1\n"); }), ErrorCode::Configuration);
  EXPECT_EQ(code_of([] { parse_config("just words\n"); }), ErrorCode::Configuration);
  EXPECT_EQ(code_of([] { load_config(temp_path("missing.cfg")); }), ErrorCode::Io);
}

TEST(Config, Fnv1aVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Simulate, DeterministicAndPoissonTotal) {
  auto cfg = parse_config("mask.kind = quadratic2d\ngrid.size = 256\n");
  const auto a = simulate(cfg, 1e6, 1, false);
  const auto b = simulate(cfg, 1e6, 1, false);
  EXPECT_EQ(a.interferogram.counts, b.interferogram.counts);
  EXPECT_NE(simulate(cfg, 1e6, 2, false).interferogram.counts, a.interferogram.counts);
  // signal plus dark and accidental counts over exposure = N / signal_rate
  const double expected = 1e6 * (1.0 + (25.0 + 3.0) / 400.0);
  EXPECT_NEAR(static_cast<double>(a.interferogram.total()), expected, 5.0 * std::sqrt(expected));
  // the kept event list histograms to the same map
  const auto c = simulate(cfg, 1e5, 3, true);
  ASSERT_TRUE(c.events);
  EXPECT_EQ(histogram_events(*c.events, cfg.grid).counts, c.interferogram.counts);
  EXPECT_EQ(simulate(cfg, 1e5, 3, false).interferogram.counts, c.interferogram.counts);
}

TEST(Simulate, ReferenceConfigIsFlat) {
  auto cfg = parse_config("mask.kind = spiral\n");
  const auto ref = reference_config(cfg);
  EXPECT_EQ(ref.mask.kind, MaskKind::Flat);
  EXPECT_EQ(ref.tilt.a1, cfg.tilt.a1);
  EXPECT_NE(reference_seed(1), 1u);
  EXPECT_EQ(reference_seed(1), reference_seed(1));
}

TEST(Simulate, PinholeReferenceOnVortexIsEmpty) {
  auto cfg = parse_config("mask.kind = spiral\nreference.mode = pinhole\nreference.pinhole_radius = 0.05\n");
  EXPECT_EQ(code_of([&] { build_fields(cfg); }), ErrorCode::EmptyReference);
  cfg.pinhole_offset_x = 2e3;
  EXPECT_NO_THROW(build_fields(cfg));
}

TEST(Simulate, CameraPathProducesDetections) {
  auto cfg = parse_config("mask.kind = quadratic2d\ngrid.size = 128\nbeam.waist_um = 200\ncamera.render = 1\n");
  EXPECT_EQ(cfg.events_per_frame, 1);
  const auto run = simulate(cfg, 2000, 4, true);
  cfg.render_camera = false;
  const auto truth = simulate(cfg, 2000, 4, true);
  ASSERT_TRUE(run.events);
  const double n = static_cast<double>(run.events->events.size());
  EXPECT_GE(n, 0.99 * truth.events->events.size());
  EXPECT_LE(n, truth.events->events.size());
  EXPECT_EQ(run.interferogram.total() + run.interferogram.discarded, run.events->events.size());
}
