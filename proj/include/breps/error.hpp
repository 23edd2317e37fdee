#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace breps {

enum class Errc {
  InvalidArgument,
  InvalidConfig,
  DimensionMismatch,
  ZeroVector,
  EmptyScores,
  NoBlocks,
  DuplicateDocId,
  IoError,
  BadMagic,
  TruncatedFile,
  NotFound,
  MalformedLine,
  ServiceUnavailable,
  InvalidResponse,
  InvalidTriplet,
  MissingDocument,
  NonFiniteLoss,
};

std::string_view errc_name(Errc code) noexcept;

/// Exception carrying a machine-checkable error code. All engine failures
/// surface as this type.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace breps
