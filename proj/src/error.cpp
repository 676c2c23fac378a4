#include "drive4d/error.hpp"

namespace drive4d {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::BehindCamera: return "BehindCamera";
    case ErrorKind::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::MixedFrames: return "MixedFrames";
    case ErrorKind::WrongFrameTag: return "WrongFrameTag";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::InsufficientCorrespondences: return "InsufficientCorrespondences";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::TooFewFrames: return "TooFewFrames";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::MissingCounterpart: return "MissingCounterpart";
    case ErrorKind::InvalidTrajectory: return "InvalidTrajectory";
  }
  return "Unknown";
}

}  // namespace drive4d
