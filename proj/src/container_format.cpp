#include "sdce/container_format.hpp"

#include <zlib.h>

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "sdce/error.hpp"

namespace sdce {

namespace {

constexpr std::uint16_t kFlagCompressThenEncrypt = 0x0001;

template <typename T>
void put_le(std::uint8_t* out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out[i] = static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i));
  }
}

template <typename T>
T get_le(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t{in[i]} << (8 * i);
  return static_cast<T>(v);
}

// Reads exactly n bytes; returns how many arrived.
std::size_t read_some(std::istream& in, std::uint8_t* dst, std::size_t n) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount());
}

std::uint64_t payload_bytes_for(std::uint64_t bits) { return (bits + 7) / 8; }

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto n = static_cast<uInt>(
        std::min<std::size_t>(bytes.size() - offset, std::numeric_limits<uInt>::max()));
    crc = ::crc32(crc, bytes.data() + offset, n);
    offset += n;
  }
  return static_cast<std::uint32_t>(crc);
}

ContainerHeader ContainerHeader::for_chunk(const FrameMeta& meta, std::uint64_t frames,
                                           PipelineOrder order, std::uint32_t chunk_index,
                                           std::uint16_t burn_in) {
  ContainerHeader h;
  h.order = order;
  h.width = meta.width;
  h.height = meta.height;
  h.fps_num = meta.fps_num;
  h.fps_den = meta.fps_den;
  h.frame_count = frames;
  h.chunk_index = chunk_index;
  h.burn_in = burn_in;
  return h;
}

FrameMeta ContainerHeader::meta() const noexcept {
  return {width, height, fps_num, fps_den, frame_count};
}

void ContainerHeader::validate() const {
  if (version != kContainerVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                "container version " + std::to_string(version) + " is not supported");
  }
  if (width < 1 || height < 1) throw Error(ErrorCode::InvalidHeader, "container dimensions must be >= 1");
  if (fps_num < 1 || fps_den < 1) throw Error(ErrorCode::InvalidHeader, "container frame rate must be >= 1/1");
}

FrameRecord FrameRecord::from(const EncodedFrame& frame) {
  return {frame.frame_index, frame.original_pixel_count, frame.code_lengths, frame.payload};
}

EncodedFrame FrameRecord::to_encoded(PipelineOrder order) const {
  return {frame_index, pixel_count, code_lengths, payload, order};
}

std::array<std::uint8_t, kContainerHeaderSize> encode_header(const ContainerHeader& h) {
  std::array<std::uint8_t, kContainerHeaderSize> out{};
  std::copy(kContainerMagic.begin(), kContainerMagic.end(), out.begin());
  put_le<std::uint16_t>(&out[4], h.version);
  put_le<std::uint16_t>(&out[6], h.order == PipelineOrder::CompressThenEncrypt
                                     ? kFlagCompressThenEncrypt : 0);
  put_le<std::uint32_t>(&out[8], h.width);
  put_le<std::uint32_t>(&out[12], h.height);
  put_le<std::uint32_t>(&out[16], h.fps_num);
  put_le<std::uint32_t>(&out[20], h.fps_den);
  put_le<std::uint64_t>(&out[24], h.frame_count);
  put_le<std::uint32_t>(&out[32], h.chunk_index);
  put_le<std::uint16_t>(&out[36], h.burn_in);
  return out;
}

std::vector<std::uint8_t> encode_record(const FrameRecord& r) {
  const std::uint64_t payload_len = payload_bytes_for(r.payload.bit_length);
  if (r.payload.payload.size() != payload_len) {
    throw Error(ErrorCode::CorruptRecord, "payload length disagrees with its bit length",
                r.frame_index);
  }
  std::vector<std::uint8_t> out(kRecordFixedSize + payload_len + 4);
  put_le<std::uint64_t>(&out[0], r.frame_index);
  put_le<std::uint64_t>(&out[8], r.pixel_count);
  std::copy(r.code_lengths.begin(), r.code_lengths.end(), out.begin() + 16);
  put_le<std::uint64_t>(&out[272], r.payload.bit_length);
  std::copy(r.payload.payload.begin(), r.payload.payload.end(), out.begin() + kRecordFixedSize);
  const std::size_t body = out.size() - 4;
  put_le<std::uint32_t>(&out[body], crc32(std::span(out).first(body)));
  return out;
}

ContainerWriter::ContainerWriter(std::ostream& sink, const ContainerHeader& header)
    : sink_(sink), header_(header) {
  header_.validate();
  put(encode_header(header_));
}

void ContainerWriter::put(std::span<const std::uint8_t> bytes) {
  sink_.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  if (!sink_) throw Error(ErrorCode::SinkFailure, "container sink rejected a write");
  bytes_ += bytes.size();
}

void ContainerWriter::append(const FrameRecord& record) {
  if (record.frame_index != next_index_ || next_index_ >= header_.frame_count) {
    throw Error(ErrorCode::OutOfOrderFrame,
                "expected frame " + std::to_string(next_index_) + ", got " +
                    std::to_string(record.frame_index),
                record.frame_index);
  }
  put(encode_record(record));
  ++next_index_;
}

std::uint64_t ContainerWriter::finish() {
  if (next_index_ != header_.frame_count) {
    throw Error(ErrorCode::OutOfOrderFrame,
                "header declares " + std::to_string(header_.frame_count) + " frames, " +
                    std::to_string(next_index_) + " written");
  }
  sink_.flush();
  if (!sink_) throw Error(ErrorCode::SinkFailure, "container sink failed on flush");
  return bytes_;
}

std::uint64_t write_container(const ContainerHeader& header,
                              std::span<const FrameRecord> records, std::ostream& sink) {
  ContainerWriter writer(sink, header);
  for (const FrameRecord& r : records) writer.append(r);
  return writer.finish();
}

ContainerReader::ContainerReader(std::istream& source) : source_(source) {
  std::array<std::uint8_t, kContainerHeaderSize> raw{};
  const std::size_t got = read_some(source_, raw.data(), raw.size());
  if (got >= 4 && !std::equal(kContainerMagic.begin(), kContainerMagic.end(), raw.begin())) {
    throw Error(ErrorCode::BadMagic, "not an SDCE container");
  }
  if (got < raw.size()) throw Error(ErrorCode::Truncated, "container header is truncated");

  header_.version = get_le<std::uint16_t>(&raw[4]);
  const auto flags = get_le<std::uint16_t>(&raw[6]);
  header_.width = get_le<std::uint32_t>(&raw[8]);
  header_.height = get_le<std::uint32_t>(&raw[12]);
  header_.fps_num = get_le<std::uint32_t>(&raw[16]);
  header_.fps_den = get_le<std::uint32_t>(&raw[20]);
  header_.frame_count = get_le<std::uint64_t>(&raw[24]);
  header_.chunk_index = get_le<std::uint32_t>(&raw[32]);
  header_.burn_in = get_le<std::uint16_t>(&raw[36]);
  header_.validate();
  if ((flags & ~kFlagCompressThenEncrypt) != 0 || raw[38] != 0 || raw[39] != 0) {
    throw Error(ErrorCode::InvalidHeader, "unknown container flags or reserved bytes set");
  }
  header_.order = (flags & kFlagCompressThenEncrypt) ? PipelineOrder::CompressThenEncrypt
                                                     : PipelineOrder::EncryptThenCompress;
}

std::optional<FrameRecord> ContainerReader::next() {
  if (read_ == header_.frame_count) return std::nullopt;
  const std::uint64_t index = read_;

  std::vector<std::uint8_t> raw(kRecordFixedSize);
  if (read_some(source_, raw.data(), raw.size()) != raw.size()) {
    throw Error(ErrorCode::Truncated, "container ends inside a record header", index);
  }
  FrameRecord r;
  r.frame_index = get_le<std::uint64_t>(&raw[0]);
  r.pixel_count = get_le<std::uint64_t>(&raw[8]);
  std::copy(raw.begin() + 16, raw.begin() + 272, r.code_lengths.begin());
  r.payload.bit_length = get_le<std::uint64_t>(&raw[272]);

  // Bound the allocation before trusting any length field.
  const std::uint64_t expected_pixels = std::uint64_t{header_.width} * header_.height;
  if (r.pixel_count != expected_pixels ||
      r.payload.bit_length > expected_pixels * kMaxCodeLength + 8) {
    throw Error(ErrorCode::CorruptRecord, "record length fields are inconsistent", index);
  }

  const std::uint64_t payload_len = payload_bytes_for(r.payload.bit_length);
  raw.resize(kRecordFixedSize + payload_len + 4);
  const std::size_t want = payload_len + 4;
  if (read_some(source_, raw.data() + kRecordFixedSize, want) != want) {
    throw Error(ErrorCode::Truncated, "container ends inside a record payload", index);
  }
  const std::size_t body = raw.size() - 4;
  const auto stored = get_le<std::uint32_t>(&raw[body]);
  if (stored != crc32(std::span(raw).first(body))) {
    throw Error(ErrorCode::CorruptRecord, "record CRC mismatch", index);
  }
  if (r.frame_index != index) {
    throw Error(ErrorCode::CorruptRecord, "record carries frame index " +
                std::to_string(r.frame_index), index);
  }
  r.payload.payload.assign(raw.begin() + kRecordFixedSize, raw.begin() + static_cast<std::ptrdiff_t>(body));
  ++read_;
  return r;
}

void ContainerReader::expect_end() {
  if (source_.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::CorruptRecord, "trailing bytes after the last record");
  }
}

Container read_container(std::istream& source) {
  ContainerReader reader(source);
  Container c{reader.header(), {}};
  while (auto r = reader.next()) c.records.push_back(std::move(*r));
  reader.expect_end();
  return c;
}

std::string serialize_container(const ContainerHeader& header,
                                std::span<const FrameRecord> records) {
  std::ostringstream out(std::ios::binary);
  write_container(header, records, out);
  return std::move(out).str();
}

Container parse_container(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_container(in);
}

}  // namespace sdce
