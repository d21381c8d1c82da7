#include "sdce/error.hpp"

namespace sdce {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::KeyOutOfRange: return "KeyOutOfRange";
    case ErrorCode::DegenerateOrbit: return "DegenerateOrbit";
    case ErrorCode::KeyDerivationFailed: return "KeyDerivationFailed";
    case ErrorCode::KeyFileSyntax: return "KeyFileSyntax";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::SymbolNotInTable: return "SymbolNotInTable";
    case ErrorCode::InvalidCodeTable: return "InvalidCodeTable";
    case ErrorCode::InvalidCodeword: return "InvalidCodeword";
    case ErrorCode::TruncatedStream: return "TruncatedStream";
    case ErrorCode::TrailingBits: return "TrailingBits";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::PixelCountMismatch: return "PixelCountMismatch";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::OutOfOrderFrame: return "OutOfOrderFrame";
    case ErrorCode::InvalidHeader: return "InvalidHeader";
    case ErrorCode::BadSignature: return "BadSignature";
    case ErrorCode::UnsupportedColorspace: return "UnsupportedColorspace";
    case ErrorCode::HeaderSyntax: return "HeaderSyntax";
    case ErrorCode::TruncatedFrame: return "TruncatedFrame";
    case ErrorCode::ChunkTooSmall: return "ChunkTooSmall";
    case ErrorCode::MissingChunk: return "MissingChunk";
    case ErrorCode::CorruptChunk: return "CorruptChunk";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroInput: return "ZeroInput";
    case ErrorCode::ZeroDuration: return "ZeroDuration";
    case ErrorCode::NonPositiveProbability: return "NonPositiveProbability";
    case ErrorCode::SinkFailure: return "SinkFailure";
    case ErrorCode::SourceFailure: return "SourceFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what,
             std::optional<std::uint64_t> frame,
             std::optional<std::uint32_t> chunk)
    : std::runtime_error(what), code_(code), frame_(frame), chunk_(chunk) {}

Error Error::with_chunk(std::uint32_t chunk) const {
  return Error(code_, what(), frame_, chunk);
}

Error Error::with_frame(std::uint64_t frame) const {
  return Error(code_, what(), frame, chunk_);
}

}  // namespace sdce
