#pragma once

// Measurement helpers shared by the CLI and the benchmark harness: pull the
// encrypted byte stream out of containers and run the avalanche protocol.

#include <cstdint>
#include <span>
#include <vector>

#include "sdce/chunk_engine.hpp"
#include "sdce/container_format.hpp"

namespace sdce {

// The bytes that leave the cipher stage:
//   cte  the XORed Huffman payloads, concatenated
//   etc  the XORed pixels, recovered by Huffman-decoding each record (no
//        key needed since encryption happened before compression)
std::vector<std::uint8_t> cipher_bytes(const Container& container);
std::vector<std::uint8_t> cipher_bytes(std::span<const EncodedChunk> chunks);
std::vector<std::uint8_t> cipher_bytes(std::span<const ChunkInput> chunks);

// XOR-ciphertext frames (pixels ^ keystream, before any compression), using
// the same per-chunk keys and burn-in as the encoder.
std::vector<Frame> cipher_frames(const RawVideo& video, const ChunkPlan& plan,
                                 const ChaosKey& master, std::uint16_t burn_in = kDefaultBurnIn);

// Encodes with a single worker and returns the chunks in index order.
// Throws the first chunk failure.
std::vector<EncodedChunk> encode_all(const RawVideo& video, const ChunkPlan& plan,
                                     const ChaosKey& master, PipelineOrder order,
                                     std::uint16_t burn_in = kDefaultBurnIn);

enum class KeyPerturbation {
  ChunkNu0,     // lowest bit of each derived chunk key's nu0
  ChunkLambda,  // lowest bit of each derived chunk key's lambda
  MasterNu0,    // lowest bit of the master nu0, then derived as usual
};

// The cipher stream (as cipher_bytes would return it) with the chunk keys
// perturbed. A one-ulp change of nu0 is often rounded away by the first map
// step, and a one-ulp change of the master nu0 can also vanish in the
// derivation's addition, so both nu0 variants may leave chunks unchanged.
// lambda enters every step, which makes ChunkLambda the reference protocol.
std::vector<std::uint8_t> perturbed_cipher_bytes(const RawVideo& video, const ChunkPlan& plan,
                                                 const ChaosKey& master, PipelineOrder order,
                                                 KeyPerturbation how,
                                                 std::uint16_t burn_in = kDefaultBurnIn);

double key_avalanche(std::span<const std::uint8_t> base_cipher, const RawVideo& video,
                     const ChunkPlan& plan, const ChaosKey& master, PipelineOrder order,
                     KeyPerturbation how = KeyPerturbation::ChunkLambda,
                     std::uint16_t burn_in = kDefaultBurnIn);

struct AvalancheReport {
  double key_nu0 = 0;
  double key_lambda = 0;
  double master_nu0 = 0;
  // Lowest bit of the first pixel flipped. Compared over the common prefix
  // when the payload length changes.
  double plaintext = 0;
  std::uint64_t bytes_compared = 0;
};

AvalancheReport measure_avalanche(const RawVideo& video, const ChunkPlan& plan,
                                  const ChaosKey& master, PipelineOrder order,
                                  std::uint16_t burn_in = kDefaultBurnIn);

}  // namespace sdce
