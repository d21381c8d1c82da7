#include "sdce/huffman_codec.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "sdce/error.hpp"

namespace sdce {

namespace {

constexpr unsigned kLutBits = 11;

struct Node {
  std::uint64_t weight;
  std::uint16_t min_symbol;
  int left;
  int right;
};

struct NodeOrder {
  const std::vector<Node>* nodes;
  // priority_queue is a max-heap; invert to pop the lightest node first.
  bool operator()(int a, int b) const {
    const Node& x = (*nodes)[a];
    const Node& y = (*nodes)[b];
    if (x.weight != y.weight) return x.weight > y.weight;
    return x.min_symbol > y.min_symbol;
  }
};

CodeLengths huffman_lengths(const std::array<std::uint64_t, kAlphabetSize>& weights) {
  std::vector<Node> nodes;
  nodes.reserve(2 * kAlphabetSize);
  for (std::size_t s = 0; s < kAlphabetSize; ++s) {
    if (weights[s] > 0) {
      nodes.push_back({weights[s], static_cast<std::uint16_t>(s), -1, -1});
    }
  }
  CodeLengths lengths{};
  if (nodes.size() == 1) {
    lengths[nodes[0].min_symbol] = 1;
    return lengths;
  }

  std::priority_queue<int, std::vector<int>, NodeOrder> heap(NodeOrder{&nodes});
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) heap.push(i);
  while (heap.size() > 1) {
    const int a = heap.top();
    heap.pop();
    const int b = heap.top();
    heap.pop();
    const Node merged{nodes[a].weight + nodes[b].weight,
                      std::min(nodes[a].min_symbol, nodes[b].min_symbol), a, b};
    nodes.push_back(merged);
    heap.push(static_cast<int>(nodes.size()) - 1);
  }

  // Depth-first walk from the root assigning depths to leaves.
  std::vector<std::pair<int, unsigned>> stack{{heap.top(), 0u}};
  while (!stack.empty()) {
    auto [idx, depth] = stack.back();
    stack.pop_back();
    const Node& n = nodes[idx];
    if (n.left < 0) {
      lengths[n.min_symbol] = static_cast<std::uint8_t>(std::min(depth, 255u));
    } else {
      stack.push_back({n.left, depth + 1});
      stack.push_back({n.right, depth + 1});
    }
  }
  return lengths;
}

unsigned max_of(const CodeLengths& lengths) {
  return *std::max_element(lengths.begin(), lengths.end());
}

}  // namespace

std::size_t SymbolHistogram::present_symbols() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(), [](std::uint64_t c) { return c > 0; }));
}

double SymbolHistogram::probability(std::uint8_t symbol) const noexcept {
  if (total == 0) return 0.0;
  return static_cast<double>(counts[symbol]) / static_cast<double>(total);
}

CodeTable CodeTable::from_lengths(const CodeLengths& lengths) {
  CodeTable table;
  table.lengths_ = lengths;

  std::uint64_t kraft = 0;  // in units of 2^-kMaxCodeLength
  std::size_t present = 0;
  for (std::uint8_t len : lengths) {
    if (len == 0) continue;
    if (len > kMaxCodeLength) {
      throw Error(ErrorCode::InvalidCodeTable,
                  "code length " + std::to_string(len) + " exceeds 32");
    }
    ++present;
    kraft += std::uint64_t{1} << (kMaxCodeLength - len);
  }
  constexpr std::uint64_t kOne = std::uint64_t{1} << kMaxCodeLength;
  if (present == 0) throw Error(ErrorCode::InvalidCodeTable, "code table has no symbols");
  if (kraft > kOne) throw Error(ErrorCode::InvalidCodeTable, "code lengths violate Kraft");
  if (present >= 2 && kraft != kOne) {
    throw Error(ErrorCode::InvalidCodeTable, "code lengths do not form a complete code");
  }

  std::vector<std::uint16_t> order;
  for (std::size_t s = 0; s < kAlphabetSize; ++s) {
    if (lengths[s] > 0) order.push_back(static_cast<std::uint16_t>(s));
  }
  std::stable_sort(order.begin(), order.end(), [&](std::uint16_t a, std::uint16_t b) {
    return lengths[a] < lengths[b];
  });
  std::uint64_t code = 0;
  unsigned prev = lengths[order.front()];
  for (std::uint16_t s : order) {
    code <<= (lengths[s] - prev);
    prev = lengths[s];
    table.codes_[s] = static_cast<std::uint32_t>(code);
    ++code;
  }
  table.max_length_ = max_of(lengths);
  return table;
}

std::size_t CodeTable::present_symbols() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(lengths_.begin(), lengths_.end(), [](std::uint8_t l) { return l > 0; }));
}

void BitWriter::write(std::uint32_t code, unsigned length) {
  acc_ = (acc_ << length) | code;
  pending_ += length;
  bits_ += length;
  while (pending_ >= 8) {
    pending_ -= 8;
    bytes_.push_back(static_cast<std::uint8_t>(acc_ >> pending_));
  }
  acc_ &= (std::uint64_t{1} << pending_) - 1;
}

BitStream BitWriter::finish() && {
  if (pending_ > 0) {
    bytes_.push_back(static_cast<std::uint8_t>(acc_ << (8 - pending_)));
  }
  return {std::move(bytes_), bits_};
}

SymbolHistogram build_histogram(std::span<const std::uint8_t> pixels) {
  if (pixels.empty()) throw Error(ErrorCode::EmptyInput, "histogram of an empty frame");
  SymbolHistogram hist;
  for (std::uint8_t p : pixels) ++hist.counts[p];
  hist.total = pixels.size();
  return hist;
}

CodeTable build_code_table(const SymbolHistogram& hist) {
  if (hist.total == 0) throw Error(ErrorCode::EmptyHistogram, "empty histogram");
  auto weights = hist.counts;
  CodeLengths lengths = huffman_lengths(weights);
  while (max_of(lengths) > kMaxCodeLength) {
    for (auto& w : weights) {
      if (w > 0) w = (w + 1) / 2;
    }
    lengths = huffman_lengths(weights);
  }
  return CodeTable::from_lengths(lengths);
}

BitStream encode(std::span<const std::uint8_t> pixels, const CodeTable& table) {
  BitWriter writer;
  for (std::uint8_t p : pixels) {
    const unsigned len = table.length(p);
    if (len == 0) {
      throw Error(ErrorCode::SymbolNotInTable,
                  "symbol " + std::to_string(p) + " has no code");
    }
    writer.write(table.code(p), len);
  }
  return std::move(writer).finish();
}

namespace {

class CanonicalDecoder {
 public:
  explicit CanonicalDecoder(const CodeTable& table) {
    max_len_ = table.max_length();
    for (std::size_t s = 0; s < kAlphabetSize; ++s) {
      const unsigned len = table.length(static_cast<std::uint8_t>(s));
      if (len == 0) continue;
      ++count_[len];
      sorted_.push_back(static_cast<std::uint8_t>(s));
    }
    std::stable_sort(sorted_.begin(), sorted_.end(), [&](std::uint8_t a, std::uint8_t b) {
      return table.length(a) < table.length(b);
    });
    std::uint64_t code = 0;
    std::uint32_t index = 0;
    for (unsigned len = 1; len <= kMaxCodeLength; ++len) {
      code <<= 1;
      first_code_[len] = code;
      first_index_[len] = index;
      code += count_[len];
      index += count_[len];
    }
    lut_.assign(std::size_t{1} << kLutBits, Entry{0, 0});
    for (std::uint8_t s : sorted_) {
      const unsigned len = table.length(s);
      if (len > kLutBits) continue;
      const std::uint32_t base = table.code(s) << (kLutBits - len);
      const std::uint32_t span = 1u << (kLutBits - len);
      for (std::uint32_t i = 0; i < span; ++i) lut_[base + i] = Entry{s, static_cast<std::uint8_t>(len)};
    }
  }

  // Returns the code length matched at the top of `window` (64 bits, MSB
  // first) and writes the symbol; 0 means no codeword matches.
  unsigned match(std::uint64_t window, std::uint8_t& symbol) const noexcept {
    const Entry e = lut_[window >> (64 - kLutBits)];
    if (e.length != 0) {
      symbol = e.symbol;
      return e.length;
    }
    for (unsigned len = kLutBits + 1; len <= max_len_; ++len) {
      const std::uint64_t code = window >> (64 - len);
      if (code >= first_code_[len] && code - first_code_[len] < count_[len]) {
        symbol = sorted_[first_index_[len] + (code - first_code_[len])];
        return len;
      }
    }
    return 0;
  }

 private:
  struct Entry {
    std::uint8_t symbol;
    std::uint8_t length;
  };
  std::array<std::uint32_t, kMaxCodeLength + 1> count_{};
  std::array<std::uint64_t, kMaxCodeLength + 1> first_code_{};
  std::array<std::uint32_t, kMaxCodeLength + 1> first_index_{};
  std::vector<std::uint8_t> sorted_;
  std::vector<Entry> lut_;
  unsigned max_len_ = 0;
};

// Left-aligned 64-bit window over the payload; bits past the end read as 0.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) { refill(); }

  std::uint64_t window() const noexcept { return buf_; }

  void consume(unsigned n) noexcept {
    buf_ <<= n;
    avail_ -= std::min(avail_, n);
    pos_ += n;
    refill();
  }

  std::uint64_t position() const noexcept { return pos_; }

 private:
  void refill() noexcept {
    while (avail_ <= 56 && next_ < bytes_.size()) {
      buf_ |= std::uint64_t{bytes_[next_++]} << (56 - avail_);
      avail_ += 8;
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t next_ = 0;
  std::uint64_t buf_ = 0;
  unsigned avail_ = 0;
  std::uint64_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> decode(const BitStream& stream, const CodeTable& table,
                                 std::size_t count) {
  const std::uint64_t payload_bits = std::uint64_t{stream.payload.size()} * 8;
  if (payload_bits >= stream.bit_length && payload_bits - stream.bit_length > 7) {
    throw Error(ErrorCode::TrailingBits, "payload carries more than 7 padding bits");
  }
  const std::uint64_t limit = std::min(payload_bits, stream.bit_length);

  std::vector<std::uint8_t> out(count);
  if (count == 0) {
    if (stream.bit_length != 0) throw Error(ErrorCode::TrailingBits, "bits left after 0 symbols");
    return out;
  }
  const CanonicalDecoder decoder(table);
  BitReader reader(stream.payload);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint8_t symbol = 0;
    const unsigned len = decoder.match(reader.window(), symbol);
    if (len == 0 || reader.position() + len > limit) {
      if (reader.position() + (len == 0 ? 1 : len) > limit) {
        throw Error(ErrorCode::TruncatedStream,
                    "bitstream exhausted after " + std::to_string(i) + " of " +
                        std::to_string(count) + " symbols");
      }
      throw Error(ErrorCode::InvalidCodeword,
                  "no codeword matches at bit " + std::to_string(reader.position()));
    }
    out[i] = symbol;
    reader.consume(len);
  }
  if (reader.position() != stream.bit_length) {
    throw Error(ErrorCode::TrailingBits,
                std::to_string(stream.bit_length - reader.position()) +
                    " bits left after the last symbol");
  }
  if (const unsigned tail = stream.bit_length % 8; tail != 0 && !stream.payload.empty() &&
      (stream.payload.back() & (0xffu >> tail)) != 0) {
    throw Error(ErrorCode::TrailingBits, "padding bits are not zero");
  }
  return out;
}

std::vector<std::uint8_t> decode_lenient(const BitStream& stream,
                                         const CodeTable& table,
                                         std::size_t count) {
  std::vector<std::uint8_t> out(count);
  const CanonicalDecoder decoder(table);
  BitReader reader(stream.payload);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint8_t symbol = 0;
    unsigned len = decoder.match(reader.window(), symbol);
    if (len == 0) {
      // Only incomplete (single-symbol) tables can miss.
      for (std::size_t s = 0; s < kAlphabetSize; ++s) {
        if (table.length(static_cast<std::uint8_t>(s)) > 0) {
          symbol = static_cast<std::uint8_t>(s);
          break;
        }
      }
      len = 1;
    }
    out[i] = symbol;
    reader.consume(len);
  }
  return out;
}

double mean_code_length(const SymbolHistogram& hist, const CodeTable& table) {
  if (hist.total == 0) throw Error(ErrorCode::EmptyHistogram, "empty histogram");
  std::uint64_t weighted = 0;
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < kAlphabetSize; ++s) {
    weighted += hist.counts[s] * table.length(static_cast<std::uint8_t>(s));
    total += hist.counts[s];
  }
  return static_cast<double>(weighted) / static_cast<double>(total);
}

}  // namespace sdce
