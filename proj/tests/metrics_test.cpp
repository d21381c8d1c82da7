#include "sdce/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "sdce/error.hpp"

namespace sdce {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::EmptyInput;
}

std::vector<Frame> random_frames(std::mt19937_64& rng, std::uint32_t w, std::uint32_t h, int n) {
  std::vector<Frame> out;
  for (int i = 0; i < n; ++i) {
    Frame f(w, h);
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng());
    out.push_back(std::move(f));
  }
  return out;
}

// straightforward reference written independently of the library
double naive_mse(const std::vector<Frame>& a, const std::vector<Frame>& b) {
  long double sum = 0;
  long double count = 0;
  for (std::size_t f = 0; f < a.size(); ++f) {
    for (std::uint32_t y = 0; y < a[f].height; ++y) {
      for (std::uint32_t x = 0; x < a[f].width; ++x) {
        const long double d = static_cast<long double>(a[f].at(x, y)) - b[f].at(x, y);
        sum += d * d;
        count += 1;
      }
    }
  }
  return static_cast<double>(sum / count);
}

TEST(Mse, IdenticalIsZero) {
  std::mt19937_64 rng(1);
  const auto a = random_frames(rng, 17, 9, 3);
  EXPECT_EQ(mse(a, a), 0.0);
  EXPECT_EQ(psnr(a, a), kInf);
}

TEST(Mse, ExtremesAndZeroDb) {
  const std::vector<Frame> black{Frame(4, 4, 0)};
  const std::vector<Frame> white{Frame(4, 4, 255)};
  EXPECT_EQ(mse(black, white), 65025.0);
  EXPECT_EQ(psnr(black, white), 0.0);
}

TEST(Mse, MatchesNaiveReference) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_frames(rng, 1 + rng() % 40, 1 + rng() % 40, 1 + rng() % 4);
    std::vector<Frame> b = a;
    for (auto& f : b) {
      for (auto& p : f.pixels) {
        if (rng() % 3 == 0) p = static_cast<std::uint8_t>(rng());
      }
    }
    EXPECT_NEAR(mse(a, b), naive_mse(a, b), 1e-9);
    const double m = naive_mse(a, b);
    if (m > 0) EXPECT_NEAR(psnr(a, b), 10 * std::log10(255.0 * 255.0 / m), 1e-9);
  }
}

TEST(Mse, ByteOverload) {
  const std::vector<std::uint8_t> a{0, 10, 20}, b{3, 10, 16};
  EXPECT_DOUBLE_EQ(mse(a, b), 25.0 / 3);
  EXPECT_DOUBLE_EQ(psnr(a, b), 10 * std::log10(65025.0 / (25.0 / 3)));
}

TEST(Psnr, MonotoneInMse) {
  double prev = kInf;
  for (double m = 0.01; m < 70000; m *= 1.7) {
    const double p = psnr_from_mse(m);
    EXPECT_LT(p, prev);
    prev = p;
  }
  EXPECT_EQ(psnr_from_mse(0), kInf);
}

TEST(Psnr, CustomPeak) {
  EXPECT_DOUBLE_EQ(psnr_from_mse(1.0, 10.0), 20.0);
}

TEST(Pil, Values) {
  EXPECT_EQ(pil(1000, 1000), 0.0);
  EXPECT_DOUBLE_EQ(pil(1000, 900), 10.0);
  EXPECT_DOUBLE_EQ(pil(1000, 1100), -10.0);
}

TEST(Entropy, Bounds) {
  EXPECT_EQ(entropy(std::vector<std::uint8_t>(1000, 7)), 0.0);
  std::vector<std::uint8_t> all(256 * 4);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint8_t>(i);
  EXPECT_DOUBLE_EQ(entropy(all), 8.0);
  EXPECT_DOUBLE_EQ(entropy(std::vector<std::uint8_t>{1, 2}), 1.0);
  const std::vector<std::uint8_t> skew{0, 0, 0, 1};
  EXPECT_NEAR(entropy(skew), -(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25)), 1e-15);
}

TEST(Avalanche, Values) {
  const std::vector<std::uint8_t> a{0x00, 0xff, 0x0f}, b{0xff, 0x00, 0xf0};
  EXPECT_EQ(avalanche(a, a), 0.0);
  EXPECT_EQ(avalanche(a, b), 100.0);
  const std::vector<std::uint8_t> c{0x01, 0xff, 0x0f};
  EXPECT_DOUBLE_EQ(avalanche(a, c), 100.0 / 24);
}

TEST(Avalanche, Symmetric) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::uint8_t> a(1 + rng() % 100), b(a.size());
    for (auto& x : a) x = static_cast<std::uint8_t>(rng());
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(avalanche(a, b), avalanche(b, a));
  }
}

TEST(Rates, Throughput) {
  EXPECT_DOUBLE_EQ(throughput(5'000'000, 2.0), 2.5);
  EXPECT_DOUBLE_EQ(throughput(0, 1.0), 0.0);
}

TEST(Rates, BpcAndCompressionAgree) {
  EXPECT_EQ(bpc(1000, 1000), 8.0);
  EXPECT_EQ(bpc(125, 1000), 1.0);
  EXPECT_EQ(compression_pct(1000, 250), 75.0);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 1000; ++t) {
    const std::uint64_t in = 1 + rng() % 10'000'000;
    const std::uint64_t out = rng() % 20'000'000;
    EXPECT_NEAR(compression_pct(in, out), (1.0 - bpc(out, in) / 8.0) * 100.0, 1e-12 * 100);
  }
}

TEST(Cel, Values) {
  EXPECT_EQ(categorical_entropy_loss({{1, 0}, {0, 1}}, {{1, 0.3}, {0.7, 1}}), 0.0);
  EXPECT_DOUBLE_EQ(categorical_entropy_loss({{1}}, {{0.1}}), 1.0);
  EXPECT_DOUBLE_EQ(categorical_entropy_loss({{2, 0}}, {{0.01, 0}}), 4.0);
}

TEST(Cel, MatchesNaiveReference) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.001, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t rows = 1 + rng() % 6, cols = 1 + rng() % 6;
    Matrix s(rows, std::vector<double>(cols)), r = s;
    double expect = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        s[i][j] = rng() % 4 == 0 ? 0.0 : u(rng);
        r[i][j] = u(rng);
        expect += s[i][j] * -std::log(r[i][j]) / std::log(10.0);
      }
    }
    EXPECT_NEAR(categorical_entropy_loss(s, r), expect, 1e-12 * std::max(1.0, expect));
  }
}

TEST(Errors, AllRejections) {
  const std::vector<Frame> one{Frame(2, 2)};
  const std::vector<Frame> two{Frame(2, 2), Frame(2, 2)};
  const std::vector<Frame> wide{Frame(3, 2)};
  EXPECT_EQ(code_of([&] { mse(one, two); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { mse(one, wide); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { psnr(one, wide); }), ErrorCode::ShapeMismatch);
  const std::vector<std::uint8_t> a{1, 2}, b{1};
  EXPECT_EQ(code_of([&] { mse(a, b); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { avalanche(a, b); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([] { entropy(std::vector<std::uint8_t>{}); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([] { pil(0, 0); }), ErrorCode::ZeroInput);
  EXPECT_EQ(code_of([] { bpc(1, 0); }), ErrorCode::ZeroInput);
  EXPECT_EQ(code_of([] { compression_pct(0, 1); }), ErrorCode::ZeroInput);
  EXPECT_EQ(code_of([] { throughput(1, 0.0); }), ErrorCode::ZeroDuration);
  EXPECT_EQ(code_of([] { throughput(1, -1.0); }), ErrorCode::ZeroDuration);
  EXPECT_EQ(code_of([] { categorical_entropy_loss({{1}}, {{0}}); }),
            ErrorCode::NonPositiveProbability);
  EXPECT_EQ(code_of([] { categorical_entropy_loss({{1}}, {{1.5}}); }),
            ErrorCode::NonPositiveProbability);
  EXPECT_EQ(code_of([] { categorical_entropy_loss({{1}}, {{1}, {1}}); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([] { categorical_entropy_loss({{1, 1}}, {{1}}); }), ErrorCode::ShapeMismatch);
}

TEST(Csv, HeaderAndRoundTrip) {
  MetricsReport r{0.0, kInf, 0.0, 7.99912, 49.87, 71.3, 80.25, 4.48, 44.0, kNaN};
  MetricsReport s{1.0 / 3, 12.5, -2.0, 0.0, 0.0, 1e-300, 1e300, 8.0, 0.0, 0.1};
  const std::vector<MetricsReport> rows{r, s};
  const std::string text = format_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
  const auto back = parse_csv(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_TRUE(back[0].same_as(r));
  EXPECT_TRUE(back[1].same_as(s));
  EXPECT_NE(format_csv_row(r).find("inf"), std::string::npos);
}

TEST(Csv, RandomRoundTrip) {
  std::mt19937_64 rng(6);
  std::vector<MetricsReport> rows(200);
  for (auto& r : rows) {
    for (double* f : {&r.mse, &r.psnr, &r.pil, &r.entropy, &r.avalanche, &r.throughput_encode,
                      &r.throughput_decode, &r.bpc, &r.compression_pct, &r.cel}) {
      double v;
      do {
        v = std::bit_cast<double>(rng());
      } while (std::isnan(v));
      *f = v;
    }
  }
  const auto back = parse_csv(format_csv(rows));
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_TRUE(back[i].same_as(rows[i])) << i;
}

TEST(Csv, Malformed) {
  EXPECT_EQ(code_of([] { parse_csv(""); }), ErrorCode::HeaderSyntax);
  EXPECT_EQ(code_of([] { parse_csv("a,b\n"); }), ErrorCode::HeaderSyntax);
  EXPECT_EQ(code_of([] { parse_csv(std::string(kCsvHeader) + "\n1,2,3\n"); }),
            ErrorCode::HeaderSyntax);
  EXPECT_EQ(code_of([] { parse_csv(std::string(kCsvHeader) + "\n1,2,3,4,5,6,7,8,9,x\n"); }),
            ErrorCode::HeaderSyntax);
}

TEST(Csv, Files) {
  const auto path = std::filesystem::temp_directory_path() / "sdce_metrics_test.csv";
  const std::vector<MetricsReport> rows{{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}};
  write_csv_file(path, rows);
  const auto back = read_csv_file(path);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(back[0].same_as(rows[0]));
  std::filesystem::remove(path);
  EXPECT_EQ(code_of([&] { read_csv_file(path); }), ErrorCode::SourceFailure);
}

}  // namespace
}  // namespace sdce
