#pragma once

// Assessment metrics. Everything here is a pure function.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdce/frame.hpp"

namespace sdce {

// Mean of squared differences over every pixel of every frame.
double mse(std::span<const Frame> a, std::span<const Frame> b);
double mse(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

// 10*log10(peak^2 / mse); +infinity when mse == 0.
double psnr_from_mse(double mse_value, double max_value = 255.0);
double psnr(std::span<const Frame> a, std::span<const Frame> b, double max_value = 255.0);
double psnr(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
            double max_value = 255.0);

// Percentage of information loss. ZeroInput when input_bytes == 0.
double pil(std::uint64_t input_bytes, std::uint64_t decompressed_bytes);

// Shannon entropy in bits per byte over the symbols that occur.
double entropy(std::span<const std::uint8_t> data);

// Percentage of differing bits between two equal-length streams.
double avalanche(std::span<const std::uint8_t> base, std::span<const std::uint8_t> perturbed);

// Decimal megabytes per second.
double throughput(std::uint64_t bytes, double seconds);

double bpc(std::uint64_t compressed_bytes, std::uint64_t input_bytes);
double compression_pct(std::uint64_t input_bytes, std::uint64_t compressed_bytes);

// -sum_ij sent_ij * log10(received_ij). Rows and columns must match; any
// received entry paired with a nonzero sent entry must lie in (0, 1].
using Matrix = std::vector<std::vector<double>>;
double categorical_entropy_loss(const Matrix& sent, const Matrix& received);

struct MetricsReport {
  double mse = 0;
  double psnr = 0;
  double pil = 0;
  double entropy = 0;
  double avalanche = 0;
  double throughput_encode = 0;
  double throughput_decode = 0;
  double bpc = 0;
  double compression_pct = 0;
  double cel = 0;

  // Bitwise comparison so NaN fields compare equal to themselves.
  bool same_as(const MetricsReport& other) const noexcept;
};

inline constexpr std::string_view kCsvHeader =
    "mse,psnr,pil,entropy,avalanche,throughput_encode,throughput_decode,bpc,compression_pct,cel";

// Shortest round-trip decimal per field; infinities print as "inf".
std::string format_csv_row(const MetricsReport& report);
MetricsReport parse_csv_row(std::string_view row);

// Writes the header line followed by one row per report.
std::string format_csv(std::span<const MetricsReport> reports);
std::vector<MetricsReport> parse_csv(const std::string& text);
void write_csv_file(const std::filesystem::path& path, std::span<const MetricsReport> reports);
std::vector<MetricsReport> read_csv_file(const std::filesystem::path& path);

}  // namespace sdce
