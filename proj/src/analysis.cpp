#include "sdce/analysis.hpp"

#include <algorithm>

#include "sdce/metrics.hpp"

namespace sdce {

std::vector<std::uint8_t> cipher_bytes(const Container& c) {
  std::vector<std::uint8_t> out;
  for (const FrameRecord& r : c.records) {
    if (c.header.order == PipelineOrder::CompressThenEncrypt) {
      out.insert(out.end(), r.payload.payload.begin(), r.payload.payload.end());
    } else {
      const CodeTable table = CodeTable::from_lengths(r.code_lengths);
      const auto xored = decode(r.payload, table, r.pixel_count);
      out.insert(out.end(), xored.begin(), xored.end());
    }
  }
  return out;
}

std::vector<std::uint8_t> cipher_bytes(std::span<const EncodedChunk> chunks) {
  std::vector<std::uint8_t> out;
  for (const auto& c : chunks) {
    const auto part = cipher_bytes(parse_container(c.container));
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<std::uint8_t> cipher_bytes(std::span<const ChunkInput> chunks) {
  std::vector<std::uint8_t> out;
  for (const auto& c : chunks) {
    const auto part = cipher_bytes(parse_container(c.container));
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<Frame> cipher_frames(const RawVideo& video, const ChunkPlan& plan,
                                 const ChaosKey& master, std::uint16_t burn_in) {
  std::vector<Frame> out;
  out.reserve(video.frames.size());
  for (const ChunkSpec& spec : plan.chunks) {
    const ChaosKey key = derive_chunk_key(master, spec.index);
    ChaosState state = stream_start(key, burn_in);
    for (std::uint64_t f = 0; f < spec.frame_count; ++f) {
      const Frame& src = video.frames.at(spec.first_frame + f);
      auto c = encrypt_frame(src.pixels, state, key);
      state = c.state;
      out.emplace_back(src.width, src.height, std::move(c.bytes));
    }
  }
  return out;
}

std::vector<EncodedChunk> encode_all(const RawVideo& video, const ChunkPlan& plan,
                                     const ChaosKey& master, PipelineOrder order,
                                     std::uint16_t burn_in) {
  EncodeOptions opts;
  opts.order = order;
  opts.burn_in = burn_in;
  auto results = encode_chunks(plan, video, master, opts);
  require_all(results);
  std::vector<EncodedChunk> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r.value));
  return out;
}

namespace {

double prefix_avalanche(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  const std::size_t n = std::min(a.size(), b.size());
  return avalanche(a.first(n), b.first(n));
}

// Same bytes cipher_bytes() extracts, produced straight from the pipeline
// with an arbitrary per-chunk key.
template <typename KeyFor>
std::vector<std::uint8_t> stream_with(const RawVideo& video, const ChunkPlan& plan,
                                      KeyFor&& key_for, PipelineOrder order,
                                      std::uint16_t burn_in) {
  std::vector<std::uint8_t> out;
  for (const ChunkSpec& spec : plan.chunks) {
    const ChaosKey key = key_for(spec.index);
    ChaosState state = stream_start(key, burn_in);
    for (std::uint64_t f = 0; f < spec.frame_count; ++f) {
      const Frame& src = video.frames.at(spec.first_frame + f);
      if (order == PipelineOrder::EncryptThenCompress) {
        auto c = encrypt_frame(src.pixels, state, key);
        state = c.state;
        out.insert(out.end(), c.bytes.begin(), c.bytes.end());
      } else {
        auto step = encode_frame(src, f, state, key, order);
        state = step.state;
        out.insert(out.end(), step.frame.payload.payload.begin(), step.frame.payload.payload.end());
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> perturbed_cipher_bytes(const RawVideo& video, const ChunkPlan& plan,
                                                 const ChaosKey& master, PipelineOrder order,
                                                 KeyPerturbation how, std::uint16_t burn_in) {
  switch (how) {
    case KeyPerturbation::ChunkNu0:
      return stream_with(video, plan, [&](std::uint32_t i) {
        return validate_key(flip_low_bit_nu0(derive_chunk_key(master, i)));
      }, order, burn_in);
    case KeyPerturbation::ChunkLambda:
      return stream_with(video, plan, [&](std::uint32_t i) {
        return validate_key(flip_low_bit_lambda(derive_chunk_key(master, i)));
      }, order, burn_in);
    case KeyPerturbation::MasterNu0:
      break;
  }
  const ChaosKey flipped = validate_key(flip_low_bit_nu0(master));
  return stream_with(video, plan, [&](std::uint32_t i) { return derive_chunk_key(flipped, i); },
                     order, burn_in);
}

double key_avalanche(std::span<const std::uint8_t> base_cipher, const RawVideo& video,
                     const ChunkPlan& plan, const ChaosKey& master, PipelineOrder order,
                     KeyPerturbation how, std::uint16_t burn_in) {
  return avalanche(base_cipher, perturbed_cipher_bytes(video, plan, master, order, how, burn_in));
}

AvalancheReport measure_avalanche(const RawVideo& video, const ChunkPlan& plan,
                                  const ChaosKey& master, PipelineOrder order,
                                  std::uint16_t burn_in) {
  const auto base = stream_with(video, plan, [&](std::uint32_t i) { return derive_chunk_key(master, i); },
                                order, burn_in);
  AvalancheReport r;
  r.bytes_compared = base.size();
  r.key_nu0 = key_avalanche(base, video, plan, master, order, KeyPerturbation::ChunkNu0, burn_in);
  r.key_lambda = key_avalanche(base, video, plan, master, order, KeyPerturbation::ChunkLambda, burn_in);
  r.master_nu0 = key_avalanche(base, video, plan, master, order, KeyPerturbation::MasterNu0, burn_in);

  RawVideo touched = video;
  if (!touched.frames.empty() && !touched.frames[0].pixels.empty()) {
    touched.frames[0].pixels[0] ^= 1;
  }
  const auto other = stream_with(touched, plan, [&](std::uint32_t i) { return derive_chunk_key(master, i); },
                                 order, burn_in);
  r.plaintext = prefix_avalanche(base, other);
  return r;
}

}  // namespace sdce
