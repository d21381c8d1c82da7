#pragma once

// Frame-aligned chunking and parallel chunk processing.
//
// A sequence is cut into chunks of at most chunk_size bytes (whole frames
// only). Chunk i is encoded with derive_chunk_key(master, i) into its own
// .sdce container, so chunks are independent: any worker count produces the
// same bytes, and a damaged chunk never affects its neighbours.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdce/chaos_keystream.hpp"
#include "sdce/error.hpp"
#include "sdce/frame.hpp"
#include "sdce/frame_pipeline.hpp"

namespace sdce {

inline constexpr std::uint64_t kDefaultChunkSize = std::uint64_t{64} << 20;

struct ChunkSpec {
  std::uint32_t index = 0;
  std::uint64_t first_frame = 0;
  std::uint64_t frame_count = 0;
  std::uint64_t key_fingerprint = 0;  // set by assign_chunk_keys

  friend bool operator==(const ChunkSpec&, const ChunkSpec&) = default;
};

struct ChunkPlan {
  std::uint64_t chunk_size = kDefaultChunkSize;
  std::vector<ChunkSpec> chunks;
};

// frames_per_chunk = floor(chunk_size / frame_bytes); the last chunk may be
// short. ChunkTooSmall when a single frame does not fit.
ChunkPlan plan_chunks(const FrameMeta& meta, std::uint64_t chunk_size = kDefaultChunkSize);
void assign_chunk_keys(ChunkPlan& plan, const ChaosKey& master);

enum class FailurePolicy {
  // The first failure stops new chunks from starting; in-flight chunks are
  // drained. Unstarted chunks come back with neither value nor error.
  AbortBatch,
  // Every chunk runs and reports its own outcome.
  Isolate,
};

template <typename T>
struct ChunkResult {
  ChunkSpec spec;
  std::optional<T> value;
  std::optional<Error> error;

  bool ok() const noexcept { return value.has_value(); }
  bool started() const noexcept { return value.has_value() || error.has_value(); }
};

// Rethrows the lowest-index failure, or MissingChunk for an unstarted one.
template <typename T>
void require_all(const std::vector<ChunkResult<T>>& results) {
  for (const auto& r : results) {
    if (r.error) throw *r.error;
    if (!r.value) {
      throw Error(ErrorCode::MissingChunk, "chunk was not processed", std::nullopt, r.spec.index);
    }
  }
}

struct EncodedChunk {
  ChunkSpec spec;
  PipelineOrder order = PipelineOrder::CompressThenEncrypt;
  std::string container;  // complete .sdce file
};

struct DecodedChunk {
  ChunkSpec spec;
  FrameMeta meta;  // frame_count is the chunk's frame count
  std::vector<Frame> frames;
};

// Serialized chunk file as handed to the decoder.
struct ChunkInput {
  std::uint32_t index = 0;
  std::uint64_t first_frame = 0;
  std::string container;
};

struct EncodeOptions {
  PipelineOrder order = PipelineOrder::CompressThenEncrypt;
  unsigned workers = 1;
  std::uint16_t burn_in = kDefaultBurnIn;
  FailurePolicy policy = FailurePolicy::AbortBatch;
};

struct DecodeOptions {
  unsigned workers = 1;
  DecodeMode mode = DecodeMode::Strict;
  FailurePolicy policy = FailurePolicy::AbortBatch;
};

// Results are ordered by chunk index whatever order workers finish in.
std::vector<ChunkResult<EncodedChunk>> encode_chunks(const ChunkPlan& plan,
                                                     const RawVideo& video,
                                                     const ChaosKey& master,
                                                     const EncodeOptions& options);

// Strict-mode Huffman failures on a compress-then-encrypt record whose CRC
// verified are reported as KeyMismatch: the bytes are intact, so the
// keystream must be wrong.
std::vector<ChunkResult<DecodedChunk>> decode_chunks(std::span<const ChunkInput> chunks,
                                                     const ChaosKey& master,
                                                     const DecodeOptions& options);

// Single chunk decode, as run by each worker.
DecodedChunk decode_chunk(const ChunkInput& chunk, const ChaosKey& master,
                          DecodeMode mode = DecodeMode::Strict);

// Concatenates decoded chunks in index order. Indices must be exactly
// 0..n-1 with contiguous frame ranges (MissingChunk otherwise).
RawVideo merge_decoded(std::span<const DecodedChunk> chunks);
RawVideo merge_decoded(const std::vector<ChunkResult<DecodedChunk>>& results);

// Manifest: a header line followed by one line per chunk:
//   # sdce-manifest v1 width=W height=H fps=N/D frames=F order=cte
//   index=0 frames=0..64 path=clip.000000.sdce status=ok crc32=89abcdef
// Frame ranges are half-open; paths are relative to the manifest.
enum class ChunkStatus { Ok, Failed, Pending };

struct ManifestEntry {
  std::uint32_t index = 0;
  std::uint64_t first_frame = 0;
  std::uint64_t frame_count = 0;
  std::string path;
  ChunkStatus status = ChunkStatus::Pending;
  std::uint32_t crc32 = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  FrameMeta meta;
  PipelineOrder order = PipelineOrder::CompressThenEncrypt;
  std::vector<ManifestEntry> entries;

  bool complete() const noexcept;
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

std::string format_manifest(const Manifest& manifest);
Manifest parse_manifest(const std::string& text);
Manifest read_manifest(const std::filesystem::path& path);

// "<dir>/<stem>.<index:06>.sdce" next to the manifest.
std::filesystem::path chunk_file_path(const std::filesystem::path& manifest_path,
                                      std::uint32_t index);

// Writes every successful chunk file and the manifest (failed and unstarted
// chunks are listed with their status). Returns the manifest written.
Manifest write_chunk_set(const std::filesystem::path& manifest_path, const FrameMeta& meta,
                         PipelineOrder order,
                         const std::vector<ChunkResult<EncodedChunk>>& results);

// Loads one chunk file listed in the manifest and checks its CRC.
// MissingChunk for absent files or non-ok entries, CorruptChunk on CRC
// mismatch.
ChunkInput load_chunk(const std::filesystem::path& manifest_path, const ManifestEntry& entry);

}  // namespace sdce
