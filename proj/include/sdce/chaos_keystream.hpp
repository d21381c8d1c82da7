#pragma once

// Logistic-map keystream: nu' = lambda * nu * (1 - nu), one byte per step.
//
// All arithmetic is IEEE-754 binary64 with a pinned evaluation order so that
// an encoder and decoder on different hosts regenerate the same stream bit
// for bit. Build flags must not enable -ffast-math or FMA contraction for
// the library (it is compiled with -ffp-contract=off).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sdce {

inline constexpr double kMinLambda = 3.57;
inline constexpr double kMaxLambda = 4.0;
inline constexpr std::size_t kValidationSteps = 1024;
inline constexpr std::uint16_t kDefaultBurnIn = 64;

struct ChaosKey {
  double nu0 = 0.0;
  double lambda = 0.0;

  friend bool operator==(const ChaosKey&, const ChaosKey&) = default;
};

struct ChaosState {
  double nu = 0.0;
  std::uint64_t steps = 0;

  friend bool operator==(const ChaosState&, const ChaosState&) = default;
};

// Range checks plus a burn-in of kValidationSteps iterations that rejects
// orbits hitting 0, 1 or NaN, or revisiting nu0 or any of the last 16
// states. Throws KeyOutOfRange / DegenerateOrbit.
ChaosKey validate_key(const ChaosKey& key);

inline ChaosState initial_state(const ChaosKey& key) { return {key.nu0, 0}; }

// One logistic-map step. Throws DegenerateOrbit when the result leaves (0,1).
ChaosState advance(const ChaosState& state, const ChaosKey& key);

// floor(nu * 1e8) mod 256
std::uint8_t keystream_byte(const ChaosState& state) noexcept;

struct Keystream {
  std::vector<std::uint8_t> bytes;
  ChaosState state;
};

// bytes[i] is the value emitted after i+1 advances from start.
Keystream generate_keystream(const ChaosKey& key, const ChaosState& start,
                             std::size_t n);

// XOR `data` in place with the keystream continuing from `start`; returns
// the state after data.size() advances. Same stream as generate_keystream.
ChaosState apply_keystream(std::span<std::uint8_t> data, const ChaosKey& key,
                           const ChaosState& start);

// Advance `count` steps without emitting (the pre-frame burn-in).
ChaosState discard(const ChaosKey& key, const ChaosState& start,
                   std::size_t count);

// Per-chunk key: nu0' = frac(nu0 + (index + 1) / phi), clamped into
// [2^-20, 1 - 2^-20]; lambda unchanged. Degenerate results are retried with
// index + 2^16, at most 8 attempts, then KeyDerivationFailed.
ChaosKey derive_chunk_key(const ChaosKey& master, std::uint32_t chunk_index);

// 64-bit FNV-1a over the two bit patterns; identifies a key in logs/plans
// without revealing it directly.
std::uint64_t key_fingerprint(const ChaosKey& key) noexcept;

// Key file: "nu0=<16 hex>\nlambda=<16 hex>\n", raw big-endian binary64 bits.
std::string format_key(const ChaosKey& key);
ChaosKey parse_key(const std::string& text);
void write_key_file(const std::filesystem::path& path, const ChaosKey& key);
ChaosKey read_key_file(const std::filesystem::path& path);

// Chi-square of the first kScreenBytes keystream bytes (after the default
// burn-in) against uniform, below the 0.001 critical value for 255 d.o.f.
inline constexpr std::size_t kScreenBytes = 16384;
inline constexpr double kScreenChiSquare = 330.5;
bool keystream_looks_uniform(const ChaosKey& key);

// Deterministic key generation with nu0 in [0.1, 0.9] and lambda in
// [3.9, 4.0], retried until validate_key accepts and the keystream passes
// keystream_looks_uniform.
ChaosKey generate_key(std::uint64_t seed);

// Same key with the lowest mantissa bit of nu0 (or lambda) flipped.
ChaosKey flip_low_bit_nu0(const ChaosKey& key) noexcept;
ChaosKey flip_low_bit_lambda(const ChaosKey& key) noexcept;

}  // namespace sdce
