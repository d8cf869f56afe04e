#include "core/grid.hpp"

#include <string>

namespace holo {

void GridSpec::validate() const {
  if (width < 8 || height < 8)
    throw Error(ErrorCode::Configuration, "grid must be at least 8x8 pixels");
  if (!is_power_of_two(width) || !is_power_of_two(height))
    throw Error(ErrorCode::Dimension, "grid dimensions must be powers of two, got " +
                                          std::to_string(width) + "x" + std::to_string(height));
  if (!(pitch > 0.0)) throw Error(ErrorCode::Configuration, "grid pitch must be positive");
}

}  // namespace holo
