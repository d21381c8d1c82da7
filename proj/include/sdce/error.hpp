#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sdce {

enum class ErrorCode {
  // keys
  KeyOutOfRange,
  DegenerateOrbit,
  KeyDerivationFailed,
  KeyFileSyntax,
  KeyMismatch,
  // huffman
  EmptyInput,
  EmptyHistogram,
  SymbolNotInTable,
  InvalidCodeTable,
  InvalidCodeword,
  TruncatedStream,
  TrailingBits,
  // frames
  MalformedFrame,
  PixelCountMismatch,
  // container
  BadMagic,
  UnsupportedVersion,
  CorruptRecord,
  Truncated,
  OutOfOrderFrame,
  InvalidHeader,
  // video io
  BadSignature,
  UnsupportedColorspace,
  HeaderSyntax,
  TruncatedFrame,
  // chunking
  ChunkTooSmall,
  MissingChunk,
  CorruptChunk,
  // metrics
  ShapeMismatch,
  LengthMismatch,
  ZeroInput,
  ZeroDuration,
  NonPositiveProbability,
  // io
  SinkFailure,
  SourceFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every library failure is reported through this type. frame/chunk are set
// when the failure can be pinned to a position in the sequence.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::uint64_t> frame = std::nullopt,
        std::optional<std::uint32_t> chunk = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::uint64_t> frame() const noexcept { return frame_; }
  std::optional<std::uint32_t> chunk() const noexcept { return chunk_; }

  // Copy of this error with the chunk index attached.
  Error with_chunk(std::uint32_t chunk) const;
  Error with_frame(std::uint64_t frame) const;

 private:
  ErrorCode code_;
  std::optional<std::uint64_t> frame_;
  std::optional<std::uint32_t> chunk_;
};

}  // namespace sdce
