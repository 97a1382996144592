// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "common/error.hpp"

namespace segan {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kWrongRate: return "WrongRate";
    case ErrorCode::kInvalidWindow: return "InvalidWindow";
    case ErrorCode::kOverlapUnsupported: return "OverlapUnsupported";
    case ErrorCode::kZeroPower: return "ZeroPower";
    case ErrorCode::kManifest: return "ManifestError";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonScalarLoss: return "NonScalarLoss";
    case ErrorCode::kMissingRefBatch: return "MissingRefBatch";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kCorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kAllFramesSilent: return "AllFramesSilent";
    case ErrorCode::kNumerical: return "NumericalError";
    case ErrorCode::kIncompleteTriplet: return "IncompleteTriplet";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kInconsistentShape: return "InconsistentShape";
    case ErrorCode::kInternal: return "InternalError";
  }
  return "Unknown";
}

}  // namespace segan
