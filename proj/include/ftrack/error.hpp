#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ftrack {

enum class ErrorCode {
  kTooFewWaypoints,
  kDuplicateWaypoint,
  kOutOfRange,
  kProjectionAmbiguous,
  kTooFarFromPath,
  kProjectionFailed,
  kSingularCurvature,
  kHeadingSingular,
  kInvalidSpec,
  kDimensionMismatch,
  kMalformedDocument,
  kVersionMismatch,
  kEmptyBatch,
  kEpisodeFinished,
  kConfigInvalid,
  kIoError,
  kCheckpointMismatch,
  kMalformedCsv,
  kPathLoadError,
  kInvalidParams,
};

std::string_view ToString(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ToString(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTooFewWaypoints: return "TooFewWaypoints";
    case ErrorCode::kDuplicateWaypoint: return "DuplicateWaypoint";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kProjectionAmbiguous: return "ProjectionAmbiguous";
    case ErrorCode::kTooFarFromPath: return "TooFarFromPath";
    case ErrorCode::kProjectionFailed: return "ProjectionFailed";
    case ErrorCode::kSingularCurvature: return "SingularCurvature";
    case ErrorCode::kHeadingSingular: return "HeadingSingular";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kMalformedDocument: return "MalformedDocument";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kEpisodeFinished: return "EpisodeFinished";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kCheckpointMismatch: return "CheckpointMismatch";
    case ErrorCode::kMalformedCsv: return "MalformedCsv";
    case ErrorCode::kPathLoadError: return "PathLoadError";
    case ErrorCode::kInvalidParams: return "InvalidParams";
  }
  return "Unknown";
}

}  // namespace ftrack
