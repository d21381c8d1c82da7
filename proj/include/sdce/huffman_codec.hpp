#pragma once

// Static per-frame canonical Huffman coding over the byte alphabet.
//
// Tables travel as 256 code lengths; codewords are rebuilt canonically
// (shorter codes first, equal lengths by ascending symbol), so histogram ->
// lengths -> codes is fully deterministic.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sdce {

inline constexpr std::size_t kAlphabetSize = 256;
inline constexpr unsigned kMaxCodeLength = 32;

struct SymbolHistogram {
  std::array<std::uint64_t, kAlphabetSize> counts{};
  std::uint64_t total = 0;

  std::size_t present_symbols() const noexcept;
  double probability(std::uint8_t symbol) const noexcept;
};

using CodeLengths = std::array<std::uint8_t, kAlphabetSize>;

class CodeTable {
 public:
  CodeTable() = default;

  // Rebuilds canonical codes from stored lengths. Rejects lengths above
  // kMaxCodeLength, an empty table, Kraft sums above one, and incomplete
  // codes over two or more symbols (InvalidCodeTable).
  static CodeTable from_lengths(const CodeLengths& lengths);

  const CodeLengths& lengths() const noexcept { return lengths_; }
  std::uint8_t length(std::uint8_t symbol) const noexcept { return lengths_[symbol]; }
  std::uint32_t code(std::uint8_t symbol) const noexcept { return codes_[symbol]; }
  std::size_t present_symbols() const noexcept;
  unsigned max_length() const noexcept { return max_length_; }

  friend bool operator==(const CodeTable& a, const CodeTable& b) noexcept {
    return a.lengths_ == b.lengths_;
  }

 private:
  CodeLengths lengths_{};
  std::array<std::uint32_t, kAlphabetSize> codes_{};
  unsigned max_length_ = 0;
};

struct BitStream {
  std::vector<std::uint8_t> payload;
  std::uint64_t bit_length = 0;

  friend bool operator==(const BitStream&, const BitStream&) = default;
};

// MSB-first bit packing.
class BitWriter {
 public:
  void write(std::uint32_t code, unsigned length);
  BitStream finish() &&;

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t acc_ = 0;
  unsigned pending_ = 0;
  std::uint64_t bits_ = 0;
};

SymbolHistogram build_histogram(std::span<const std::uint8_t> pixels);

// Optimal Huffman lengths (merge order keyed by weight, then by the smallest
// symbol a node contains), canonicalised. One present symbol gets length 1.
// When the optimal tree is deeper than kMaxCodeLength the weights are
// halved (rounding up to at least 1) and the tree rebuilt.
CodeTable build_code_table(const SymbolHistogram& hist);

BitStream encode(std::span<const std::uint8_t> pixels, const CodeTable& table);

// Decodes exactly `count` symbols and requires that they consume exactly
// stream.bit_length bits. TruncatedStream when bits run out first,
// TrailingBits when bits are left over or the payload carries more than 7
// bits of padding.
std::vector<std::uint8_t> decode(const BitStream& stream, const CodeTable& table,
                                 std::size_t count);

// Decodes `count` symbols regardless of framing: missing bits read as zero,
// leftovers are ignored. Used to inspect undecodable (e.g. wrong-key) data.
std::vector<std::uint8_t> decode_lenient(const BitStream& stream,
                                         const CodeTable& table,
                                         std::size_t count);

// sum(count_i * length_i) / sum(count_i)
double mean_code_length(const SymbolHistogram& hist, const CodeTable& table);

inline double total_bits(std::uint64_t code_count, double mean_length) noexcept {
  return static_cast<double>(code_count) * mean_length;
}

}  // namespace sdce
