#pragma once

// .sdce container: one encoded chunk of a sequence.
//
// Header, 40 bytes, all integers little-endian:
//
//   offset size field
//        0    4 magic "SDCE"
//        4    2 version (1)
//        6    2 flags (bit 0 set: compress-then-encrypt)
//        8    4 width
//       12    4 height
//       16    4 fps numerator
//       20    4 fps denominator
//       24    8 frame count
//       32    4 chunk index
//       36    2 keystream burn-in
//       38    2 reserved, zero
//
// followed by frame_count records:
//
//   u64 frame_index (0-based within the container)
//   u64 pixel_count
//   u8[256] code lengths
//   u64 payload_bit_length
//   u8[ceil(bits/8)] payload
//   u32 crc32 (IEEE) over every preceding byte of the record
//
// The key is never stored; burn-in and stage order are public parameters.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdce/frame.hpp"
#include "sdce/frame_pipeline.hpp"

namespace sdce {

inline constexpr std::array<char, 4> kContainerMagic{'S', 'D', 'C', 'E'};
inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderSize = 40;
inline constexpr std::size_t kRecordFixedSize = 8 + 8 + 256 + 8;
inline constexpr std::size_t kRecordOverhead = kRecordFixedSize + 4;

struct ContainerHeader {
  std::uint16_t version = kContainerVersion;
  PipelineOrder order = PipelineOrder::CompressThenEncrypt;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t fps_num = 25;
  std::uint32_t fps_den = 1;
  std::uint64_t frame_count = 0;
  std::uint32_t chunk_index = 0;
  std::uint16_t burn_in = kDefaultBurnIn;

  static ContainerHeader for_chunk(const FrameMeta& meta, std::uint64_t frames,
                                   PipelineOrder order, std::uint32_t chunk_index,
                                   std::uint16_t burn_in = kDefaultBurnIn);
  FrameMeta meta() const noexcept;
  void validate() const;

  friend bool operator==(const ContainerHeader&, const ContainerHeader&) = default;
};

struct FrameRecord {
  std::uint64_t frame_index = 0;
  std::uint64_t pixel_count = 0;
  CodeLengths code_lengths{};
  BitStream payload;

  static FrameRecord from(const EncodedFrame& frame);
  EncodedFrame to_encoded(PipelineOrder order) const;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

// IEEE CRC-32 (the zlib/PNG polynomial).
std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept;

std::array<std::uint8_t, kContainerHeaderSize> encode_header(const ContainerHeader& header);
std::vector<std::uint8_t> encode_record(const FrameRecord& record);

class ContainerWriter {
 public:
  // Writes the header immediately.
  ContainerWriter(std::ostream& sink, const ContainerHeader& header);

  // Records must arrive with frame_index 0, 1, 2, ... (OutOfOrderFrame).
  void append(const FrameRecord& record);
  // Checks that frame_count records were written and flushes. Returns the
  // total byte count.
  std::uint64_t finish();
  std::uint64_t bytes_written() const noexcept { return bytes_; }

 private:
  void put(std::span<const std::uint8_t> bytes);

  std::ostream& sink_;
  ContainerHeader header_;
  std::uint64_t next_index_ = 0;
  std::uint64_t bytes_ = 0;
};

std::uint64_t write_container(const ContainerHeader& header,
                              std::span<const FrameRecord> records, std::ostream& sink);

// Sequential reader; records are read and CRC-checked one at a time.
class ContainerReader {
 public:
  explicit ContainerReader(std::istream& source);

  const ContainerHeader& header() const noexcept { return header_; }
  // nullopt once frame_count records have been read.
  std::optional<FrameRecord> next();
  // Throws CorruptRecord if bytes follow the last record.
  void expect_end();

 private:
  std::istream& source_;
  ContainerHeader header_;
  std::uint64_t read_ = 0;
};

struct Container {
  ContainerHeader header;
  std::vector<FrameRecord> records;

  friend bool operator==(const Container&, const Container&) = default;
};

Container read_container(std::istream& source);

std::string serialize_container(const ContainerHeader& header,
                                std::span<const FrameRecord> records);
Container parse_container(const std::string& bytes);

}  // namespace sdce
