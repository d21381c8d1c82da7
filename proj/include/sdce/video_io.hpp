#pragma once

// Raw video ingest and emit.
//
//  * Y4M (YUV4MPEG2) subset: W, H, F tags required, C420* or Cmono; only
//    the luma plane is kept.
//  * PGM (P5, maxval 255), one file per frame.
//  * RGV1: 24-byte header (magic "RGV1", then width, height, fps_num,
//    fps_den, frame_count as little-endian u32) followed by the frames.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "sdce/frame.hpp"

namespace sdce {

inline constexpr std::size_t kRgvHeaderSize = 24;

RawVideo parse_y4m(std::istream& source);
// Writes a Cmono stream.
void write_y4m(const RawVideo& video, std::ostream& sink);

RawVideo read_rgv(std::istream& source);
void write_rgv(const RawVideo& video, std::ostream& sink);

// Dispatches on the leading magic ("YUV4MPEG2" or "RGV1").
RawVideo read_video_file(const std::filesystem::path& path);
void write_rgv_file(const RawVideo& video, const std::filesystem::path& path);

// frame_000000.pgm, frame_000001.pgm, ... Returns the number written.
std::size_t write_pgm_sequence(const RawVideo& video, const std::filesystem::path& dir);
Frame read_pgm(const std::filesystem::path& path);

enum class CorpusKind { Gradient, Noise, Constant, Checker };

std::string_view to_string(CorpusKind kind) noexcept;
CorpusKind parse_corpus_kind(std::string_view text);

// Deterministic synthetic sequences:
//   Gradient  min(255, x + y + t mod 32), saturating ramp
//   Noise     uniform bytes from a seeded mt19937_64
//   Constant  every pixel 128
//   Checker   8x8 blocks of 32 / 224, shifted one block per frame
RawVideo synth_corpus(CorpusKind kind, const FrameMeta& meta, std::uint64_t seed);

}  // namespace sdce
