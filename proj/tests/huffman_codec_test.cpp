#include "sdce/huffman_codec.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include "sdce/error.hpp"

namespace sdce {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::EmptyInput;
}

SymbolHistogram hist_of(std::initializer_list<std::pair<int, std::uint64_t>> counts) {
  SymbolHistogram h;
  for (auto [s, c] : counts) {
    h.counts[static_cast<std::size_t>(s)] = c;
    h.total += c;
  }
  return h;
}

std::uint64_t weighted_bits(const SymbolHistogram& h, const CodeTable& t) {
  std::uint64_t bits = 0;
  for (std::size_t s = 0; s < 256; ++s) bits += h.counts[s] * t.lengths()[s];
  return bits;
}

// Minimum weighted length over all prefix codes. Kraft-McMillan: a prefix
// code with lengths l exists iff sum 2^-l <= 1, and the optimum pairs the
// largest weights with the shortest lengths, so walking non-decreasing
// length vectors covers every candidate.
std::uint64_t exhaustive_optimum(std::vector<std::uint64_t> w) {
  std::sort(w.rbegin(), w.rend());
  const std::size_t n = w.size();
  if (n == 1) return w[0];
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  std::vector<unsigned> len(n);
  std::function<void(std::size_t, unsigned, double, std::uint64_t)> walk =
      [&](std::size_t i, unsigned min_len, double kraft, std::uint64_t cost) {
        if (cost >= best) return;
        if (i == n) {
          best = cost;
          return;
        }
        for (unsigned l = min_len; l < n; ++l) {
          const double k = kraft + std::ldexp(1.0, -static_cast<int>(l));
          if (k > 1.0) continue;
          walk(i + 1, l, k, cost + w[i] * l);
        }
      };
  walk(0, 1, 0.0, 0);
  return best;
}

// Literal search over codeword assignments drawn from all bit strings of
// length 1..3, keeping only prefix-free ones.
std::uint64_t brute_force_three(const std::array<std::uint64_t, 3>& w) {
  std::vector<std::string> words;
  for (int len = 1; len <= 3; ++len) {
    for (int v = 0; v < (1 << len); ++v) {
      std::string s;
      for (int b = len - 1; b >= 0; --b) s += ((v >> b) & 1) ? '1' : '0';
      words.push_back(s);
    }
  }
  auto prefix = [](const std::string& a, const std::string& b) {
    return a.size() <= b.size() && b.compare(0, a.size(), a) == 0;
  };
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  for (const auto& a : words)
    for (const auto& b : words)
      for (const auto& c : words) {
        if (prefix(a, b) || prefix(b, a) || prefix(a, c) || prefix(c, a) || prefix(b, c) ||
            prefix(c, b))
          continue;
        best = std::min<std::uint64_t>(best, w[0] * a.size() + w[1] * b.size() + w[2] * c.size());
      }
  return best;
}

double kraft_sum(const CodeTable& t) {
  double k = 0;
  for (auto l : t.lengths())
    if (l) k += std::ldexp(1.0, -l);
  return k;
}

double shannon(const SymbolHistogram& h) {
  double e = 0;
  for (auto c : h.counts)
    if (c) {
      const double p = static_cast<double>(c) / static_cast<double>(h.total);
      e -= p * std::log2(p);
    }
  return e;
}

void expect_prefix_free_and_canonical(const CodeTable& t) {
  std::vector<std::pair<unsigned, unsigned>> present;  // (length, symbol)
  for (unsigned s = 0; s < 256; ++s)
    if (t.length(static_cast<std::uint8_t>(s))) present.emplace_back(t.length(static_cast<std::uint8_t>(s)), s);
  std::sort(present.begin(), present.end());
  for (std::size_t i = 0; i < present.size(); ++i) {
    for (std::size_t j = 0; j < present.size(); ++j) {
      if (i == j) continue;
      const auto [li, si] = present[i];
      const auto [lj, sj] = present[j];
      if (li > lj) continue;
      const std::uint64_t ci = t.code(static_cast<std::uint8_t>(si));
      const std::uint64_t cj = t.code(static_cast<std::uint8_t>(sj));
      ASSERT_NE(cj >> (lj - li), ci) << "symbol " << si << " prefixes " << sj;
    }
    if (i > 0) {
      // canonical: codes, left-aligned to 32 bits, strictly increase in
      // (length, symbol) order
      const auto [lp, sp] = present[i - 1];
      const auto [lc, sc] = present[i];
      const std::uint64_t prev = std::uint64_t{t.code(static_cast<std::uint8_t>(sp))} << (32 - lp);
      const std::uint64_t cur = std::uint64_t{t.code(static_cast<std::uint8_t>(sc))} << (32 - lc);
      EXPECT_LT(prev, cur);
    }
  }
}

std::vector<std::uint8_t> random_frame(std::mt19937_64& rng, std::size_t n) {
  // geometric-ish skew with a random alphabet size and offset
  const unsigned alphabet = 1 + static_cast<unsigned>(rng() % 256);
  const double skew = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
  std::geometric_distribution<unsigned> geo(std::max(skew, 1e-3));
  const unsigned offset = static_cast<unsigned>(rng() % 256);
  std::vector<std::uint8_t> out(n);
  for (auto& p : out) p = static_cast<std::uint8_t>((geo(rng) % alphabet + offset) & 0xff);
  return out;
}

TEST(Histogram, Counts) {
  const std::vector<std::uint8_t> px{7, 7, 7};
  const auto h = build_histogram(px);
  EXPECT_EQ(h.counts[7], 3u);
  EXPECT_EQ(h.total, 3u);
  EXPECT_EQ(h.present_symbols(), 1u);
  EXPECT_DOUBLE_EQ(h.probability(7), 1.0);
}

TEST(Histogram, AllValuesOnce) {
  std::vector<std::uint8_t> px(256);
  for (int i = 0; i < 256; ++i) px[i] = static_cast<std::uint8_t>(i);
  const auto h = build_histogram(px);
  for (auto c : h.counts) EXPECT_EQ(c, 1u);
  EXPECT_EQ(h.total, 256u);
}

TEST(Histogram, Conservation) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto px = random_frame(rng, 1 + rng() % 5000);
    const auto h = build_histogram(px);
    std::uint64_t sum = 0;
    double psum = 0;
    for (std::size_t s = 0; s < 256; ++s) {
      sum += h.counts[s];
      if (h.counts[s]) psum += h.probability(static_cast<std::uint8_t>(s));
    }
    EXPECT_EQ(sum, px.size());
    EXPECT_EQ(h.total, px.size());
    EXPECT_NEAR(psum, 1.0, 1e-12);
  }
}

TEST(Histogram, EmptyInput) {
  EXPECT_EQ(code_of([] { build_histogram({}); }), ErrorCode::EmptyInput);
}

TEST(CodeTable, ThreeSymbolExample) {
  const auto h = hist_of({{'A', 2}, {'B', 1}, {'C', 1}});
  const auto t = build_code_table(h);
  EXPECT_EQ(t.length('A'), 1);
  EXPECT_EQ(t.length('B'), 2);
  EXPECT_EQ(t.length('C'), 2);
  EXPECT_EQ(weighted_bits(h, t), 6u);
  EXPECT_EQ(brute_force_three({2, 1, 1}), 6u);
  EXPECT_EQ(t.code('A'), 0b0u);
  EXPECT_EQ(t.code('B'), 0b10u);
  EXPECT_EQ(t.code('C'), 0b11u);
  EXPECT_DOUBLE_EQ(mean_code_length(h, t), 1.5);
  EXPECT_DOUBLE_EQ(total_bits(4, 1.5), 6.0);
}

TEST(CodeTable, SingleSymbol) {
  const auto h = hist_of({{'X', 9}});
  const auto t = build_code_table(h);
  EXPECT_EQ(t.length('X'), 1);
  EXPECT_EQ(t.present_symbols(), 1u);
  const std::vector<std::uint8_t> px(9, 'X');
  const auto s = encode(px, t);
  EXPECT_EQ(s.bit_length, 9u);
  EXPECT_DOUBLE_EQ(mean_code_length(h, t), 1.0);
  EXPECT_EQ(decode(s, t, 9), px);
}

TEST(CodeTable, UniformIsEightBits) {
  SymbolHistogram h;
  for (auto& c : h.counts) c = 5;
  h.total = 5 * 256;
  const auto t = build_code_table(h);
  for (auto l : t.lengths()) EXPECT_EQ(l, 8);
  EXPECT_DOUBLE_EQ(mean_code_length(h, t), 8.0);
}

TEST(CodeTable, EmptyHistogram) {
  EXPECT_EQ(code_of([] { build_code_table(SymbolHistogram{}); }), ErrorCode::EmptyHistogram);
}

TEST(CodeTable, DepthLimitedToThirtyTwo) {
  // Fibonacci weights force a maximally skewed tree of depth n-1.
  SymbolHistogram h;
  std::uint64_t a = 1, b = 1;
  for (int s = 0; s < 45; ++s) {
    h.counts[s] = a;
    h.total += a;
    const auto c = a + b;
    a = b;
    b = c;
  }
  const auto t = build_code_table(h);
  EXPECT_LE(t.max_length(), kMaxCodeLength);
  EXPECT_DOUBLE_EQ(kraft_sum(t), 1.0);
  EXPECT_EQ(t.present_symbols(), 45u);
  expect_prefix_free_and_canonical(t);
  EXPECT_NO_THROW(CodeTable::from_lengths(t.lengths()));
}

TEST(CodeTable, FromLengthsRejectsBadTables) {
  CodeLengths empty{};
  EXPECT_EQ(code_of([&] { CodeTable::from_lengths(empty); }), ErrorCode::InvalidCodeTable);
  CodeLengths over{};
  over[0] = over[1] = over[2] = 1;  // Kraft 1.5
  EXPECT_EQ(code_of([&] { CodeTable::from_lengths(over); }), ErrorCode::InvalidCodeTable);
  CodeLengths incomplete{};
  incomplete[0] = 1;
  incomplete[1] = 2;  // Kraft 0.75
  EXPECT_EQ(code_of([&] { CodeTable::from_lengths(incomplete); }), ErrorCode::InvalidCodeTable);
  CodeLengths deep{};
  deep[0] = 33;
  EXPECT_EQ(code_of([&] { CodeTable::from_lengths(deep); }), ErrorCode::InvalidCodeTable);
  CodeLengths single{};
  single[9] = 1;
  EXPECT_NO_THROW(CodeTable::from_lengths(single));
}

TEST(CodeTable, CanonicalDeterminism) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const auto px = random_frame(rng, 1 + rng() % 20000);
    const auto a = build_code_table(build_histogram(px));
    const auto b = build_code_table(build_histogram(px));
    EXPECT_EQ(a.lengths(), b.lengths());
    EXPECT_EQ(CodeTable::from_lengths(a.lengths()), a);
    for (unsigned s = 0; s < 256; ++s) {
      EXPECT_EQ(CodeTable::from_lengths(a.lengths()).code(static_cast<std::uint8_t>(s)),
                a.code(static_cast<std::uint8_t>(s)));
    }
  }
}

TEST(CodeTableProperty, KraftPrefixFreeCanonical) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const auto h = build_histogram(random_frame(rng, 1 + rng() % 10000));
    const auto tab = build_code_table(h);
    if (h.present_symbols() >= 2) {
      EXPECT_DOUBLE_EQ(kraft_sum(tab), 1.0);
    } else {
      EXPECT_LE(kraft_sum(tab), 1.0);
    }
    expect_prefix_free_and_canonical(tab);
  }
}

TEST(CodeTableProperty, OptimalOnSmallAlphabets) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng() % 8;
    SymbolHistogram h;
    std::vector<std::uint64_t> w;
    std::vector<unsigned> syms(256);
    for (unsigned i = 0; i < 256; ++i) syms[i] = i;
    std::shuffle(syms.begin(), syms.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t c = 1 + rng() % 1000;
      h.counts[syms[i]] = c;
      h.total += c;
      w.push_back(c);
    }
    EXPECT_EQ(weighted_bits(h, build_code_table(h)), exhaustive_optimum(w)) << "trial " << t;
  }
}

TEST(CodeTableProperty, ShannonBound) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 300; ++t) {
    const auto h = build_histogram(random_frame(rng, 2 + rng() % 20000));
    if (h.present_symbols() < 2) continue;
    const double H = shannon(h);
    const double L = mean_code_length(h, build_code_table(h));
    EXPECT_LE(H, L + 1e-12);
    EXPECT_LT(L, H + 1);
  }
}

TEST(Encode, TwoSymbolsOneBitEach) {
  CodeLengths l{};
  l['A'] = 1;
  const auto t = CodeTable::from_lengths(l);
  const std::vector<std::uint8_t> px{'A', 'A'};
  EXPECT_EQ(encode(px, t).bit_length, 2u);
}

TEST(Encode, ExampleStreamBits) {
  const auto h = hist_of({{'A', 2}, {'B', 1}, {'C', 1}});
  const auto t = build_code_table(h);
  const std::vector<std::uint8_t> px{'A', 'B', 'A', 'C'};
  const auto s = encode(px, t);
  // 0 10 0 11 -> 010011, padded with zeros
  EXPECT_EQ(s.bit_length, 6u);
  ASSERT_EQ(s.payload.size(), 1u);
  EXPECT_EQ(s.payload[0], 0x4C);
  EXPECT_DOUBLE_EQ(static_cast<double>(s.bit_length), total_bits(4, mean_code_length(h, t)));
  EXPECT_EQ(decode(s, t, 4), px);
}

TEST(Encode, SymbolNotInTable) {
  CodeLengths l{};
  l[1] = 1;
  l[2] = 1;
  const auto t = CodeTable::from_lengths(l);
  const std::vector<std::uint8_t> px{1, 3};
  EXPECT_EQ(code_of([&] { encode(px, t); }), ErrorCode::SymbolNotInTable);
}

TEST(Decode, TruncatedStream) {
  std::mt19937_64 rng(6);
  const auto px = random_frame(rng, 4000);
  const auto t = build_code_table(build_histogram(px));
  auto s = encode(px, t);
  ASSERT_GT(s.payload.size(), 1u);
  s.payload.pop_back();
  s.bit_length = s.payload.size() * 8;
  EXPECT_EQ(code_of([&] { decode(s, t, px.size()); }), ErrorCode::TruncatedStream);
}

TEST(Decode, TrailingBits) {
  const auto h = hist_of({{'A', 2}, {'B', 1}, {'C', 1}});
  const auto t = build_code_table(h);
  const std::vector<std::uint8_t> px{'A', 'B', 'A', 'C'};
  auto s = encode(px, t);
  EXPECT_EQ(code_of([&] { decode(s, t, 3); }), ErrorCode::TrailingBits);
  auto padded = s;
  padded.payload.push_back(0);  // 16 payload bits for 6 valid
  EXPECT_EQ(code_of([&] { decode(padded, t, 4); }), ErrorCode::TrailingBits);
}

TEST(Decode, LenientCompletesOnGarbage) {
  const auto h = hist_of({{'A', 2}, {'B', 1}, {'C', 1}});
  const auto t = build_code_table(h);
  BitStream junk{{0xff}, 8};
  const auto out = decode_lenient(junk, t, 10);
  EXPECT_EQ(out.size(), 10u);
}

TEST(BitWriter, MsbFirstPacking) {
  BitWriter w;
  w.write(0b1, 1);
  w.write(0b0110, 4);
  w.write(0xABCDEF01u, 32);
  const auto s = std::move(w).finish();
  EXPECT_EQ(s.bit_length, 37u);
  // 1 0110 10101011 11001101 11101111 00000001 -> 10110101 01011110 01101111 01111000 00001000
  const std::vector<std::uint8_t> expect{0xB5, 0x5E, 0x6F, 0x78, 0x08};
  EXPECT_EQ(s.payload, expect);
  EXPECT_LE(s.bit_length, 8 * s.payload.size());
  EXPECT_LT(8 * s.payload.size(), s.bit_length + 8);
}

TEST(CodecProperty, LosslessOnRandomFrames) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 1000; ++t) {
    // log-uniform sizes, 1 .. 10^6
    const double e = std::uniform_real_distribution<double>(0.0, 6.0)(rng);
    const auto n = static_cast<std::size_t>(std::pow(10.0, e));
    const auto px = random_frame(rng, std::max<std::size_t>(n, 1));
    const auto h = build_histogram(px);
    const auto tab = build_code_table(h);
    const auto s = encode(px, tab);
    ASSERT_EQ(s.bit_length, static_cast<std::uint64_t>(std::llround(total_bits(px.size(), mean_code_length(h, tab)))));
    ASSERT_EQ(decode(s, tab, px.size()), px) << "trial " << t;
    ASSERT_EQ(decode_lenient(s, tab, px.size()), px);
  }
}

TEST(CodecProperty, DeepCodesRoundTrip) {
  // Exercise the slow path beyond the lookup table width.
  SymbolHistogram h;
  std::uint64_t a = 1, b = 1;
  for (int s = 0; s < 30; ++s) {
    h.counts[s] = a;
    h.total += a;
    const auto c = a + b;
    a = b;
    b = c;
  }
  const auto t = build_code_table(h);
  ASSERT_GT(t.max_length(), 11u);
  std::vector<std::uint8_t> px;
  for (int s = 0; s < 30; ++s)
    for (int k = 0; k < 3; ++k) px.push_back(static_cast<std::uint8_t>(s));
  std::shuffle(px.begin(), px.end(), std::mt19937_64(1));
  EXPECT_EQ(decode(encode(px, t), t, px.size()), px);
}

}  // namespace
}  // namespace sdce
