#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

#include "core/grid.hpp"

namespace holo {

// Binary 2D container:
//   "HG2D" | u16 version=1 | u16 dtype | u32 width | u32 height | f64 pitch_m |
//   u16 name length | UTF-8 name | row-major payload
// Everything little-endian.
enum class MapDType : std::uint16_t { F64 = 0, C128 = 1, U32 = 2 };

struct MapFile {
  std::string channel;
  double pitch = 0.0;
  std::variant<RealMap, ComplexMap, Array2D<std::uint32_t>> data;

  MapDType dtype() const noexcept { return static_cast<MapDType>(data.index()); }
  int width() const;
  int height() const;
};

std::string encode_map(const MapFile& map);
MapFile decode_map(const std::string& bytes);

void write_map(const std::filesystem::path& path, const MapFile& map);
MapFile read_map(const std::filesystem::path& path);

}  // namespace holo
