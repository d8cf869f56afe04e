#include "core/eventfile.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>

namespace holo {

namespace {

// Shortest decimal at the requested precision that still parses inside [0, bound).
std::string format_coord(double v, double bound, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  const double back = std::strtod(buf, nullptr);
  if (back < bound) return buf;
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

char kind_code(EventKind k) {
  switch (k) {
    case EventKind::Signal: return 's';
    case EventKind::Dark: return 'd';
    case EventKind::Accidental: return 'a';
  }
  return 's';
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(ErrorCode::Format, "event file line " + std::to_string(line) + ": bad number '" +
                                       std::string(s) + "'");
  return v;
}

}  // namespace

void write_events(std::ostream& out, const EventList& events, const EventFileOptions& opt) {
  if (opt.precision < 6 || opt.precision > 17)
    throw Error(ErrorCode::InvalidArgument, "event precision must be 6..17 significant digits");
  out << "# holo-events v1 width=" << events.width << " height=" << events.height << '\n';
  std::string line;
  for (const auto& e : events.events) {
    line = format_coord(e.x, events.width, opt.precision);
    line += ',';
    line += format_coord(e.y, events.height, opt.precision);
    if (opt.write_kind) {
      line += ',';
      line += kind_code(e.kind);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing event list");
}

EventList read_events(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorCode::Format, "event file is empty");
  static const std::regex header_re(R"(# holo-events v1 width=(\d+) height=(\d+)\s*)");
  std::smatch m;
  if (!std::regex_match(header, m, header_re))
    throw Error(ErrorCode::Format, "event file header missing or malformed");
  EventList out;
  out.width = std::stoi(m[1].str());
  out.height = std::stoi(m[2].str());

  std::string line;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string_view sv(line);
    const auto c1 = sv.find(',');
    if (c1 == std::string_view::npos)
      throw Error(ErrorCode::Format, "event file line " + std::to_string(n) + ": expected x,y");
    const auto c2 = sv.find(',', c1 + 1);
    PhotonEvent e;
    e.x = parse_double(sv.substr(0, c1), n);
    e.y = parse_double(sv.substr(c1 + 1, c2 == std::string_view::npos ? std::string_view::npos : c2 - c1 - 1), n);
    if (c2 != std::string_view::npos) {
      const auto k = sv.substr(c2 + 1);
      if (k == "s") e.kind = EventKind::Signal;
      else if (k == "d") e.kind = EventKind::Dark;
      else if (k == "a") e.kind = EventKind::Accidental;
      else throw Error(ErrorCode::Format, "event file line " + std::to_string(n) + ": bad kind");
    }
    if (!(e.x >= 0.0 && e.x < out.width && e.y >= 0.0 && e.y < out.height))
      throw Error(ErrorCode::Format, "event file line " + std::to_string(n) + ": coordinate out of bounds");
    out.events.push_back(e);
  }
  return out;
}

void write_events(const std::filesystem::path& path, const EventList& events, const EventFileOptions& opt) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  write_events(f, events, opt);
}

EventList read_events(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_events(f);
}

}  // namespace holo
