#include "sdce/frame_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sdce/error.hpp"

namespace sdce {

std::string_view to_string(PipelineOrder order) noexcept {
  return order == PipelineOrder::EncryptThenCompress ? "etc" : "cte";
}

PipelineOrder parse_order(std::string_view text) {
  if (text == "etc") return PipelineOrder::EncryptThenCompress;
  if (text == "cte") return PipelineOrder::CompressThenEncrypt;
  throw std::invalid_argument("pipeline order must be 'etc' or 'cte'");
}

Frame to_grayscale(std::span<const std::uint8_t> rgb, std::uint32_t width,
                   std::uint32_t height) {
  const std::size_t n = std::size_t{width} * height;
  if (width == 0 || height == 0 || rgb.size() != 3 * n) {
    throw Error(ErrorCode::MalformedFrame, "RGB buffer does not hold width*height triples");
  }
  Frame out(width, height);
  for (std::size_t i = 0; i < n; ++i) {
    const double luma = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
  }
  return out;
}

CipherBytes encrypt_frame(std::span<const std::uint8_t> pixels,
                          const ChaosState& state, const ChaosKey& key) {
  CipherBytes out{std::vector<std::uint8_t>(pixels.begin(), pixels.end()), state};
  out.state = apply_keystream(out.bytes, key, state);
  return out;
}

CipherBytes decrypt_frame(std::span<const std::uint8_t> cipher,
                          const ChaosState& state, const ChaosKey& key) {
  // XOR is an involution.
  return encrypt_frame(cipher, state, key);
}

EncodeStep encode_frame(const Frame& frame, std::uint64_t frame_index,
                        const ChaosState& state, const ChaosKey& key,
                        PipelineOrder order) {
  EncodeStep step;
  step.frame.frame_index = frame_index;
  step.frame.original_pixel_count = frame.pixels.size();
  step.frame.order = order;

  if (order == PipelineOrder::EncryptThenCompress) {
    auto cipher = encrypt_frame(frame.pixels, state, key);
    const CodeTable table = build_code_table(build_histogram(cipher.bytes));
    step.frame.code_lengths = table.lengths();
    step.frame.payload = encode(cipher.bytes, table);
    step.state = cipher.state;
  } else {
    const CodeTable table = build_code_table(build_histogram(frame.pixels));
    step.frame.code_lengths = table.lengths();
    step.frame.payload = encode(frame.pixels, table);
    step.state = apply_keystream(step.frame.payload.payload, key, state);
  }
  return step;
}

DecodeStep decode_frame(const EncodedFrame& enc, const ChaosState& state,
                        const ChaosKey& key, const FrameMeta& meta,
                        DecodeMode mode) {
  if (enc.original_pixel_count != meta.pixels_per_frame()) {
    throw Error(ErrorCode::PixelCountMismatch,
                "record holds " + std::to_string(enc.original_pixel_count) +
                    " pixels, sequence frames have " + std::to_string(meta.pixels_per_frame()),
                enc.frame_index);
  }
  const CodeTable table = CodeTable::from_lengths(enc.code_lengths);
  const auto huffman = [&](const BitStream& bits) {
    return mode == DecodeMode::Strict ? decode(bits, table, enc.original_pixel_count)
                                      : decode_lenient(bits, table, enc.original_pixel_count);
  };

  DecodeStep step;
  if (enc.order == PipelineOrder::EncryptThenCompress) {
    auto cipher = huffman(enc.payload);
    step.state = apply_keystream(cipher, key, state);
    step.frame = Frame(meta.width, meta.height, std::move(cipher));
  } else {
    BitStream plain = enc.payload;
    step.state = apply_keystream(plain.payload, key, state);
    step.frame = Frame(meta.width, meta.height, huffman(plain));
  }
  return step;
}

std::vector<EncodedFrame> encode_sequence(std::span<const Frame> frames,
                                          const ChaosKey& key, PipelineOrder order,
                                          std::uint16_t burn_in) {
  std::vector<EncodedFrame> out;
  out.reserve(frames.size());
  ChaosState state = stream_start(key, burn_in);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    auto step = encode_frame(frames[i], i, state, key, order);
    state = step.state;
    out.push_back(std::move(step.frame));
  }
  return out;
}

std::vector<Frame> decode_sequence(std::span<const EncodedFrame> frames,
                                   const ChaosKey& key, const FrameMeta& meta,
                                   std::uint16_t burn_in, DecodeMode mode) {
  std::vector<Frame> out;
  out.reserve(frames.size());
  ChaosState state = stream_start(key, burn_in);
  for (const EncodedFrame& enc : frames) {
    try {
      auto step = decode_frame(enc, state, key, meta, mode);
      state = step.state;
      out.push_back(std::move(step.frame));
    } catch (const Error& e) {
      if (e.frame()) throw;
      throw e.with_frame(enc.frame_index);
    }
  }
  return out;
}

}  // namespace sdce
