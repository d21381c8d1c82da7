#pragma once

// Per-frame encode/decode: grayscale -> XOR with the logistic keystream ->
// canonical Huffman, and the exact inverse.
//
// Two stage orders are supported. EncryptThenCompress builds the Huffman
// model over the ciphertext bytes; CompressThenEncrypt Huffman-codes the
// plaintext and XORs the packed payload bytes. The keystream state carries
// over from one frame to the next.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sdce/chaos_keystream.hpp"
#include "sdce/frame.hpp"
#include "sdce/huffman_codec.hpp"

namespace sdce {

enum class PipelineOrder : std::uint8_t {
  EncryptThenCompress = 0,
  CompressThenEncrypt = 1,
};

std::string_view to_string(PipelineOrder order) noexcept;
// Accepts "etc" and "cte"; throws std::invalid_argument otherwise.
PipelineOrder parse_order(std::string_view text);

enum class DecodeMode {
  Strict,
  // Huffman framing errors are ignored so undecodable payloads (for
  // instance under a wrong key) still yield a frame of the right size.
  Lenient,
};

struct EncodedFrame {
  std::uint64_t frame_index = 0;
  std::uint64_t original_pixel_count = 0;
  CodeLengths code_lengths{};
  BitStream payload;
  PipelineOrder order = PipelineOrder::CompressThenEncrypt;

  friend bool operator==(const EncodedFrame&, const EncodedFrame&) = default;
};

// BT.601 luma, round(0.299 R + 0.587 G + 0.114 B), from interleaved RGB.
Frame to_grayscale(std::span<const std::uint8_t> rgb, std::uint32_t width,
                   std::uint32_t height);

struct CipherBytes {
  std::vector<std::uint8_t> bytes;
  ChaosState state;
};

CipherBytes encrypt_frame(std::span<const std::uint8_t> pixels,
                          const ChaosState& state, const ChaosKey& key);
CipherBytes decrypt_frame(std::span<const std::uint8_t> cipher,
                          const ChaosState& state, const ChaosKey& key);

struct EncodeStep {
  EncodedFrame frame;
  ChaosState state;
};

struct DecodeStep {
  Frame frame;
  ChaosState state;
};

EncodeStep encode_frame(const Frame& frame, std::uint64_t frame_index,
                        const ChaosState& state, const ChaosKey& key,
                        PipelineOrder order);

DecodeStep decode_frame(const EncodedFrame& enc, const ChaosState& state,
                        const ChaosKey& key, const FrameMeta& meta,
                        DecodeMode mode = DecodeMode::Strict);

// Keystream position before the first frame: `burn_in` discarded steps.
inline ChaosState stream_start(const ChaosKey& key, std::uint16_t burn_in = kDefaultBurnIn) {
  return discard(key, initial_state(key), burn_in);
}

std::vector<EncodedFrame> encode_sequence(std::span<const Frame> frames,
                                          const ChaosKey& key, PipelineOrder order,
                                          std::uint16_t burn_in = kDefaultBurnIn);

std::vector<Frame> decode_sequence(std::span<const EncodedFrame> frames,
                                   const ChaosKey& key, const FrameMeta& meta,
                                   std::uint16_t burn_in = kDefaultBurnIn,
                                   DecodeMode mode = DecodeMode::Strict);

}  // namespace sdce
