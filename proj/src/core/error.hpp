#pragma once

#include <stdexcept>
#include <string>

namespace holo {

enum class ErrorCode {
  InvalidArgument,
  Configuration,
  Dimension,
  NoSideband,
  EmptyReference,
  Selection,
  FitFailure,
  EmptyValidity,
  Pipeline,
  Io,
  Format,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures are reported through this type. `stage` names the
// pipeline step that failed when the error crossed a composite operation.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {})
      : std::runtime_error(message), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

  Error with_stage(std::string stage) const { return Error(code_, what(), std::move(stage)); }

 private:
  ErrorCode code_;
  std::string stage_;
};

}  // namespace holo
