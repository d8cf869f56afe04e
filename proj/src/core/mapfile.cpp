#include "core/mapfile.hpp"

#include <bit>
#include <fstream>
#include <iterator>

namespace holo {

namespace {

constexpr char kMagic[4] = {'H', 'G', '2', 'D'};
constexpr std::uint16_t kVersion = 1;

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(const std::string& b) : bytes_(b) {}

  template <typename U>
  U le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b)
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    pos_ += sizeof(U);
    return v;
  }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::Format, "map file truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

int MapFile::width() const {
  return std::visit([](const auto& a) { return a.width(); }, data);
}
int MapFile::height() const {
  return std::visit([](const auto& a) { return a.height(); }, data);
}

std::string encode_map(const MapFile& map) {
  if (map.channel.size() > 0xffff) throw Error(ErrorCode::InvalidArgument, "channel name too long");
  std::string out(kMagic, 4);
  put_le(out, kVersion);
  put_le(out, static_cast<std::uint16_t>(map.dtype()));
  put_le(out, static_cast<std::uint32_t>(map.width()));
  put_le(out, static_cast<std::uint32_t>(map.height()));
  put_f64(out, map.pitch);
  put_le(out, static_cast<std::uint16_t>(map.channel.size()));
  out += map.channel;
  if (const auto* r = std::get_if<RealMap>(&map.data)) {
    for (double v : *r) put_f64(out, v);
  } else if (const auto* c = std::get_if<ComplexMap>(&map.data)) {
    for (const auto& v : *c) put_f64(out, v.real()), put_f64(out, v.imag());
  } else {
    for (auto v : std::get<Array2D<std::uint32_t>>(map.data)) put_le(out, v);
  }
  return out;
}

MapFile decode_map(const std::string& bytes) {
  Reader in(bytes);
  if (in.raw(4) != std::string(kMagic, 4)) throw Error(ErrorCode::Format, "bad magic: not an HG2D map file");
  const auto version = in.le<std::uint16_t>();
  if (version != kVersion)
    throw Error(ErrorCode::Format, "unsupported map file version " + std::to_string(version));
  const auto dtype = in.le<std::uint16_t>();
  const auto w = in.le<std::uint32_t>();
  const auto h = in.le<std::uint32_t>();
  MapFile map;
  map.pitch = in.f64();
  map.channel = in.raw(in.le<std::uint16_t>());
  if (w > (1u << 16) || h > (1u << 16)) throw Error(ErrorCode::Format, "map dimensions out of range");
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const std::size_t elem = dtype == 0 ? 8 : dtype == 1 ? 16 : dtype == 2 ? 4 : 0;
  if (elem == 0) throw Error(ErrorCode::Format, "unknown dtype " + std::to_string(dtype));
  if (in.remaining() != n * elem)
    throw Error(ErrorCode::Format, "payload length does not match width*height*dtype size");
  const int wi = static_cast<int>(w), hi = static_cast<int>(h);
  switch (dtype) {
    case 0: {
      RealMap a(wi, hi);
      for (auto& v : a) v = in.f64();
      map.data = std::move(a);
      break;
    }
    case 1: {
      ComplexMap a(wi, hi);
      for (auto& v : a) {
        const double re = in.f64();
        const double im = in.f64();
        v = cplx(re, im);
      }
      map.data = std::move(a);
      break;
    }
    default: {
      Array2D<std::uint32_t> a(wi, hi);
      for (auto& v : a) v = in.le<std::uint32_t>();
      map.data = std::move(a);
    }
  }
  return map;
}

void write_map(const std::filesystem::path& path, const MapFile& map) {
  const std::string bytes = encode_map(map);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

MapFile read_map(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_map(bytes);
}

}  // namespace holo
