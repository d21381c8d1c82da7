#include "sdce/metrics.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "sdce/error.hpp"

namespace sdce {

namespace {

void check_shapes(std::span<const Frame> a, std::span<const Frame> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::ShapeMismatch, "sequences hold " + std::to_string(a.size()) + " and " +
                                              std::to_string(b.size()) + " frames");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].width != b[i].width || a[i].height != b[i].height) {
      throw Error(ErrorCode::ShapeMismatch, "frame dimensions differ", i);
    }
  }
}

std::uint64_t input_guard(std::uint64_t input_bytes) {
  if (input_bytes == 0) throw Error(ErrorCode::ZeroInput, "input size must be at least one byte");
  return input_bytes;
}

constexpr std::array<double MetricsReport::*, 10> kFields = {
    &MetricsReport::mse,       &MetricsReport::psnr,
    &MetricsReport::pil,       &MetricsReport::entropy,
    &MetricsReport::avalanche, &MetricsReport::throughput_encode,
    &MetricsReport::throughput_decode, &MetricsReport::bpc,
    &MetricsReport::compression_pct,   &MetricsReport::cel,
};

}  // namespace

double mse(std::span<const Frame> a, std::span<const Frame> b) {
  check_shapes(a, b);
  long double sum = 0;
  std::uint64_t n = 0;
  for (std::size_t f = 0; f < a.size(); ++f) {
    std::uint64_t frame_sum = 0;
    const auto& pa = a[f].pixels;
    const auto& pb = b[f].pixels;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      const int d = int{pa[i]} - int{pb[i]};
      frame_sum += static_cast<std::uint64_t>(d * d);
    }
    sum += static_cast<long double>(frame_sum);
    n += pa.size();
  }
  if (n == 0) throw Error(ErrorCode::ShapeMismatch, "no pixels to compare");
  return static_cast<double>(sum / static_cast<long double>(n));
}

double mse(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "byte sequences differ in length");
  if (a.empty()) throw Error(ErrorCode::ShapeMismatch, "no pixels to compare");
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int d = int{a[i]} - int{b[i]};
    sum += static_cast<std::uint64_t>(d * d);
  }
  return static_cast<double>(sum) / static_cast<double>(a.size());
}

double psnr_from_mse(double mse_value, double max_value) {
  if (mse_value == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_value * max_value / mse_value);
}

double psnr(std::span<const Frame> a, std::span<const Frame> b, double max_value) {
  return psnr_from_mse(mse(a, b), max_value);
}

double psnr(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, double max_value) {
  return psnr_from_mse(mse(a, b), max_value);
}

double pil(std::uint64_t input_bytes, std::uint64_t decompressed_bytes) {
  const double in = static_cast<double>(input_guard(input_bytes));
  return (in - static_cast<double>(decompressed_bytes)) / in * 100.0;
}

double entropy(std::span<const std::uint8_t> data) {
  if (data.empty()) throw Error(ErrorCode::EmptyInput, "entropy of an empty sequence");
  std::array<std::uint64_t, 256> counts{};
  for (const std::uint8_t b : data) ++counts[b];
  const double n = static_cast<double>(data.size());
  double h = 0;
  for (const std::uint64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h <= 0 ? 0.0 : h;  // avoid -0
}

double avalanche(std::span<const std::uint8_t> base, std::span<const std::uint8_t> perturbed) {
  if (base.size() != perturbed.size()) {
    throw Error(ErrorCode::LengthMismatch, "streams hold " + std::to_string(base.size()) + " and " +
                                               std::to_string(perturbed.size()) + " bytes");
  }
  if (base.empty()) return 0.0;
  std::uint64_t diff = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    diff += static_cast<std::uint64_t>(std::popcount(static_cast<std::uint8_t>(base[i] ^ perturbed[i])));
  }
  return static_cast<double>(diff) / (8.0 * static_cast<double>(base.size())) * 100.0;
}

double throughput(std::uint64_t bytes, double seconds) {
  if (!(seconds > 0)) throw Error(ErrorCode::ZeroDuration, "duration must be positive");
  return static_cast<double>(bytes) / 1e6 / seconds;
}

double bpc(std::uint64_t compressed_bytes, std::uint64_t input_bytes) {
  return static_cast<double>(compressed_bytes) / static_cast<double>(input_guard(input_bytes)) * 8.0;
}

double compression_pct(std::uint64_t input_bytes, std::uint64_t compressed_bytes) {
  const double in = static_cast<double>(input_guard(input_bytes));
  return (1.0 - static_cast<double>(compressed_bytes) / in) * 100.0;
}

double categorical_entropy_loss(const Matrix& sent, const Matrix& received) {
  if (sent.size() != received.size()) throw Error(ErrorCode::ShapeMismatch, "row counts differ");
  double loss = 0;
  for (std::size_t i = 0; i < sent.size(); ++i) {
    if (sent[i].size() != received[i].size()) {
      throw Error(ErrorCode::ShapeMismatch, "row " + std::to_string(i) + " lengths differ");
    }
    for (std::size_t j = 0; j < sent[i].size(); ++j) {
      const double s = sent[i][j];
      if (s == 0) continue;
      const double r = received[i][j];
      if (!(r > 0 && r <= 1)) {
        throw Error(ErrorCode::NonPositiveProbability,
                    "received[" + std::to_string(i) + "][" + std::to_string(j) + "] is outside (0, 1]");
      }
      loss -= s * std::log10(r);
    }
  }
  return loss;
}

bool MetricsReport::same_as(const MetricsReport& other) const noexcept {
  for (auto field : kFields) {
    if (std::bit_cast<std::uint64_t>(this->*field) != std::bit_cast<std::uint64_t>(other.*field)) {
      return false;
    }
  }
  return true;
}

std::string format_csv_row(const MetricsReport& report) {
  std::string row;
  char buf[64];
  for (std::size_t i = 0; i < kFields.size(); ++i) {
    if (i) row += ',';
    const auto res = std::to_chars(buf, buf + sizeof buf, report.*kFields[i]);
    row.append(buf, res.ptr);
  }
  return row;
}

MetricsReport parse_csv_row(std::string_view row) {
  MetricsReport r;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < kFields.size(); ++i) {
    const std::size_t end = i + 1 < kFields.size() ? row.find(',', pos) : row.size();
    if (end == std::string_view::npos) {
      throw Error(ErrorCode::HeaderSyntax, "CSV row has fewer than " + std::to_string(kFields.size()) + " fields");
    }
    std::string_view cell = row.substr(pos, end - pos);
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.remove_suffix(1);
    double v = 0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
      throw Error(ErrorCode::HeaderSyntax, "bad CSV number '" + std::string(cell) + "'");
    }
    r.*kFields[i] = v;
    pos = end + 1;
  }
  return r;
}

std::string format_csv(std::span<const MetricsReport> reports) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : reports) {
    out += format_csv_row(r);
    out += '\n';
  }
  return out;
}

std::vector<MetricsReport> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::HeaderSyntax, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw Error(ErrorCode::HeaderSyntax, "unexpected CSV header");
  std::vector<MetricsReport> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    out.push_back(parse_csv_row(line));
  }
  return out;
}

void write_csv_file(const std::filesystem::path& path, std::span<const MetricsReport> reports) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << format_csv(reports);
  out.flush();
  if (!out) throw Error(ErrorCode::SinkFailure, "cannot write " + path.string());
}

std::vector<MetricsReport> read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SourceFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace sdce
