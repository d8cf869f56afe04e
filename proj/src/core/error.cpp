#include "core/error.hpp"

namespace holo {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Configuration: return "configuration error";
    case ErrorCode::Dimension: return "dimension error";
    case ErrorCode::NoSideband: return "no sideband";
    case ErrorCode::EmptyReference: return "empty reference";
    case ErrorCode::Selection: return "selection error";
    case ErrorCode::FitFailure: return "fit failure";
    case ErrorCode::EmptyValidity: return "empty validity";
    case ErrorCode::Pipeline: return "pipeline error";
    case ErrorCode::Io: return "I/O error";
    case ErrorCode::Format: return "format error";
  }
  return "unknown error";
}

}  // namespace holo
