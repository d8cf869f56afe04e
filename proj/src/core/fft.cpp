#include "core/fft.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "core/parallel.hpp"

namespace holo::fft {

namespace {

void bit_reverse(std::span<cplx> a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
}

}  // namespace

void transform(std::span<cplx> data, Direction dir) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  if ((n & (n - 1)) != 0)
    throw Error(ErrorCode::Dimension, "FFT length must be a power of two, got " + std::to_string(n));
  bit_reverse(data);
  const double sign = dir == Direction::Forward ? -1.0 : 1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles evaluated directly per index; recurrence drift would break the
    // 1e-10 round-trip bound at large sizes.
    std::vector<cplx> tw(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double ang = sign * kTwoPi * static_cast<double>(k) / static_cast<double>(len);
      tw[k] = cplx(std::cos(ang), std::sin(ang));
    }
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cplx u = data[start + k];
        const cplx v = data[start + k + half] * tw[k];
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

void transform_2d(ComplexMap& data, Direction dir) {
  const int w = data.width();
  const int h = data.height();
  if (!is_power_of_two(w) || !is_power_of_two(h))
    throw Error(ErrorCode::Dimension, "2D FFT needs power-of-two dimensions");

  parallel_for(h, [&](int j) {
    transform(std::span<cplx>(data.data() + static_cast<std::size_t>(j) * w, w), dir);
  });
  parallel_for(w, [&](int i) {
    std::vector<cplx> col(h);
    for (int j = 0; j < h; ++j) col[j] = data(i, j);
    transform(col, dir);
    for (int j = 0; j < h; ++j) data(i, j) = col[j];
  });
  const double scale = 1.0 / std::sqrt(static_cast<double>(w) * h);
  for (auto& v : data) v *= scale;
}

namespace {

ComplexMap roll(const ComplexMap& in, int sx, int sy) {
  const int w = in.width();
  const int h = in.height();
  ComplexMap out(w, h);
  for (int j = 0; j < h; ++j) {
    const int jj = (j + sy) % h;
    for (int i = 0; i < w; ++i) out((i + sx) % w, jj) = in(i, j);
  }
  return out;
}

}  // namespace

ComplexMap fftshift(const ComplexMap& in) { return roll(in, in.width() / 2, in.height() / 2); }

ComplexMap ifftshift(const ComplexMap& in) {
  return roll(in, in.width() - in.width() / 2, in.height() - in.height() / 2);
}

}  // namespace holo::fft
