#include "breps/error.hpp"

namespace breps {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::EmptyScores: return "EmptyScores";
    case Errc::NoBlocks: return "NoBlocks";
    case Errc::DuplicateDocId: return "DuplicateDocId";
    case Errc::IoError: return "IoError";
    case Errc::BadMagic: return "BadMagic";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::NotFound: return "NotFound";
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::ServiceUnavailable: return "ServiceUnavailable";
    case Errc::InvalidResponse: return "InvalidResponse";
    case Errc::InvalidTriplet: return "InvalidTriplet";
    case Errc::MissingDocument: return "MissingDocument";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
  }
  return "Unknown";
}

}  // namespace breps
