#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "core/error.hpp"

namespace holo {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

constexpr bool is_power_of_two(int n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

// Pixel (i, j) sits at x = (i - width/2) * pitch + x0, y = (j - height/2) * pitch + y0.
struct GridSpec {
  int width = 512;
  int height = 512;
  double pitch = 10e-6;  // meters per pixel
  double x0 = 0.0;
  double y0 = 0.0;

  void validate() const;

  double x_at(int i) const noexcept { return (i - width / 2) * pitch + x0; }
  double y_at(int j) const noexcept { return (j - height / 2) * pitch + y0; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(width) * height; }

  bool same_shape(const GridSpec& o) const noexcept {
    return width == o.width && height == o.height && pitch == o.pitch;
  }
};

// Row-major 2D array, index (i, j) = column i, row j.
template <typename T>
class Array2D {
 public:
  Array2D() = default;
  Array2D(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int i, int j) noexcept { return data_[static_cast<std::size_t>(j) * width_ + i]; }
  const T& operator()(int i, int j) const noexcept {
    return data_[static_cast<std::size_t>(j) * width_ + i];
  }
  T& operator[](std::size_t k) noexcept { return data_[k]; }
  const T& operator[](std::size_t k) const noexcept { return data_[k]; }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::vector<T>& vec() noexcept { return data_; }
  const std::vector<T>& vec() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool same_shape(const Array2D& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_;
  }
  template <typename U>
  bool same_shape(const Array2D<U>& o) const noexcept {
    return width_ == o.width() && height_ == o.height();
  }

  friend bool operator==(const Array2D& a, const Array2D& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using RealMap = Array2D<double>;
using ComplexMap = Array2D<cplx>;
using Mask = Array2D<std::uint8_t>;

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height())
    throw Error(ErrorCode::Dimension, std::string(what) + ": array shapes differ");
}

}  // namespace holo
