#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "core/photonsim.hpp"

namespace holo {

// Text event list:
//   # holo-events v1 width=<w> height=<h>
//   x,y[,k]      k in {s, d, a}
struct EventFileOptions {
  int precision = 9;  // significant digits, >= 6
  bool write_kind = true;
};

void write_events(std::ostream& out, const EventList& events, const EventFileOptions& opt = {});
EventList read_events(std::istream& in);

void write_events(const std::filesystem::path& path, const EventList& events, const EventFileOptions& opt = {});
EventList read_events(const std::filesystem::path& path);

}  // namespace holo
