#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drive4d {

enum class ErrorKind {
  InvalidArgument,
  BehindCamera,
  NonPositiveDepth,
  ParseError,
  ValidationError,
  FormatError,
  DimensionMismatch,
  IoError,
  BadMagic,
  UnsupportedVersion,
  TruncatedFile,
  MixedFrames,
  WrongFrameTag,
  DegenerateConfiguration,
  InsufficientCorrespondences,
  EmptySelection,
  TooFewFrames,
  EmptyMask,
  TooSmall,
  MissingCounterpart,
  InvalidTrajectory,
};

std::string_view to_string(ErrorKind kind);

// Errors raised by every module carry a kind so callers (and the CLI exit
// code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace drive4d
