// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace segan {

// Mirrors segan_status in the C API; keep the two lists in sync.
enum class ErrorCode {
  kInvalidArgument = 1,
  kNotFound,
  kUnsupportedFormat,
  kIo,
  kWrongRate,
  kInvalidWindow,
  kOverlapUnsupported,
  kZeroPower,
  kManifest,
  kShapeMismatch,
  kNonScalarLoss,
  kMissingRefBatch,
  kConfig,
  kCorruptCheckpoint,
  kNonFiniteLoss,
  kLengthMismatch,
  kAllFramesSilent,
  kNumerical,
  kIncompleteTriplet,
  kTooShort,
  kInconsistentShape,
  kInternal,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace segan
