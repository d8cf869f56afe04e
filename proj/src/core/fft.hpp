#pragma once

#include <span>

#include "core/grid.hpp"

namespace holo::fft {

enum class Direction { Forward, Inverse };

// In-place radix-2 transform, unnormalized. Forward uses exp(-2*pi*i*k*n/N).
void transform(std::span<cplx> data, Direction dir);

// Unitary 2D DFT (scaled by 1/sqrt(width*height) in both directions).
void transform_2d(ComplexMap& data, Direction dir);

// Moves index 0 to the array center (index width/2, height/2) and back.
ComplexMap fftshift(const ComplexMap& in);
ComplexMap ifftshift(const ComplexMap& in);

}  // namespace holo::fft
