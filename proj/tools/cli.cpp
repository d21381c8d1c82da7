#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "sdce/analysis.hpp"
#include "sdce/chaos_keystream.hpp"
#include "sdce/chunk_engine.hpp"
#include "sdce/metrics.hpp"
#include "sdce/video_io.hpp"

namespace sdce::cli {

namespace {

constexpr std::uint64_t kMinChunkSize = std::uint64_t{1} << 20;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Thrown for flag values that parse but break a command's preconditions.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

unsigned resolve_workers(unsigned flag) {
  if (const char* env = std::getenv("SDCE_WORKERS"); env && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096) throw UsageError("SDCE_WORKERS must be an integer >= 1");
    return static_cast<unsigned>(v);
  }
  if (flag < 1) throw UsageError("--workers must be >= 1");
  return flag;
}

// Accepts plain bytes or a K/M/G (binary) suffix.
std::uint64_t parse_size(const std::string& text) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    throw UsageError("bad size '" + text + "'");
  }
  std::string suffix = text.substr(used);
  std::transform(suffix.begin(), suffix.end(), suffix.begin(), ::toupper);
  int shift = 0;
  if (suffix.empty() || suffix == "B") shift = 0;
  else if (suffix == "K" || suffix == "KIB") shift = 10;
  else if (suffix == "M" || suffix == "MIB") shift = 20;
  else if (suffix == "G" || suffix == "GIB") shift = 30;
  else throw UsageError("bad size suffix in '" + text + "'");
  if (v > (std::numeric_limits<std::uint64_t>::max() >> shift)) throw UsageError("size too large");
  return v << shift;
}

std::uint64_t checked_chunk_size(const std::string& text) {
  const std::uint64_t size = parse_size(text);
  if (size < kMinChunkSize) throw UsageError("--chunk-size must be at least 1 MiB");
  return size;
}

ChaosKey load_key(const std::string& path) { return validate_key(read_key_file(path)); }

// Video file, or a directory of frame_*.pgm files.
RawVideo read_any_video(const std::filesystem::path& path) {
  if (!std::filesystem::is_directory(path)) return read_video_file(path);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(path)) {
    const auto name = e.path().filename().string();
    if (name.rfind("frame_", 0) == 0 && e.path().extension() == ".pgm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::SourceFailure, "no frame_*.pgm files in " + path.string());
  RawVideo v;
  for (const auto& f : files) v.frames.push_back(read_pgm(f));
  v.meta.width = v.frames[0].width;
  v.meta.height = v.frames[0].height;
  v.meta.frame_count = v.frames.size();
  v.validate();
  return v;
}

std::string describe(const Error& e) {
  std::string s = "error [" + std::string(to_string(e.code())) + "]";
  if (e.chunk()) s += " chunk " + std::to_string(*e.chunk());
  if (e.frame()) s += " frame " + std::to_string(*e.frame());
  return s + ": " + e.what();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(precision) << v;
  return o.str();
}

std::uint64_t total_container_bytes(std::span<const EncodedChunk> chunks) {
  std::uint64_t n = 0;
  for (const auto& c : chunks) n += c.container.size();
  return n;
}

int cmd_keygen(const std::string& out_path, std::optional<std::uint64_t> seed, std::ostream& out) {
  const std::uint64_t s = seed ? *seed : (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();
  const ChaosKey key = generate_key(s);
  write_key_file(out_path, key);
  out << "wrote key " << out_path << " (fingerprint " << std::hex << std::setw(16)
      << std::setfill('0') << key_fingerprint(key) << std::dec << std::setfill(' ') << ")\n";
  return kExitOk;
}

struct EncodeArgs {
  std::string input, key, output, order = "cte", chunk_size = "64M";
  unsigned workers = default_workers();
};

int cmd_encode(const EncodeArgs& a, std::ostream& out) {
  const unsigned workers = resolve_workers(a.workers);
  const std::uint64_t chunk_size = checked_chunk_size(a.chunk_size);
  PipelineOrder order;
  try {
    order = parse_order(a.order);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const ChaosKey master = load_key(a.key);
  const RawVideo video = read_video_file(a.input);

  ChunkPlan plan = plan_chunks(video.meta, chunk_size);
  assign_chunk_keys(plan, master);
  EncodeOptions opts;
  opts.order = order;
  opts.workers = workers;

  const auto start = Clock::now();
  const auto results = encode_chunks(plan, video, master, opts);
  const double secs = seconds_since(start);
  write_chunk_set(a.output, video.meta, order, results);
  require_all(results);

  std::uint64_t out_bytes = 0;
  for (const auto& r : results) out_bytes += r.value->container.size();
  const std::uint64_t in_bytes = video.byte_size();
  out << "encoded " << video.frames.size() << " frames in " << plan.chunks.size()
      << " chunks (order " << to_string(order) << ", " << workers << " workers)\n"
      << "input_bytes " << in_bytes << "\noutput_bytes " << out_bytes << "\nseconds "
      << fmt(secs, 6) << "\nthroughput_mbps " << fmt(secs > 0 ? throughput(out_bytes, secs) : 0.0)
      << "\nbpc " << fmt(bpc(out_bytes, in_bytes)) << "\n";
  return kExitOk;
}

struct DecodeArgs {
  std::string input, key, output, format = "rgv";
  bool lenient = false;
  unsigned workers = default_workers();
};

int cmd_decode(const DecodeArgs& a, std::ostream& out) {
  const unsigned workers = resolve_workers(a.workers);
  if (a.format != "rgv" && a.format != "pgm") throw UsageError("--format must be rgv or pgm");
  const ChaosKey master = load_key(a.key);
  const Manifest manifest = read_manifest(a.input);

  std::vector<ChunkInput> inputs;
  inputs.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) inputs.push_back(load_chunk(a.input, e));

  DecodeOptions opts;
  opts.workers = workers;
  opts.mode = a.lenient ? DecodeMode::Lenient : DecodeMode::Strict;
  const auto start = Clock::now();
  const auto results = decode_chunks(inputs, master, opts);
  const double secs = seconds_since(start);
  const RawVideo video = merge_decoded(results);
  if (video.meta.frame_count != manifest.meta.frame_count) {
    throw Error(ErrorCode::MissingChunk, "manifest lists " + std::to_string(manifest.meta.frame_count) +
                                             " frames, chunks hold " +
                                             std::to_string(video.meta.frame_count));
  }
  RawVideo emitted = video;
  emitted.meta.fps_num = manifest.meta.fps_num;
  emitted.meta.fps_den = manifest.meta.fps_den;
  if (a.format == "pgm") {
    write_pgm_sequence(emitted, a.output);
  } else {
    write_rgv_file(emitted, a.output);
  }
  const std::uint64_t bytes = emitted.byte_size();
  out << "decoded " << emitted.frames.size() << " frames from " << inputs.size() << " chunks\n"
      << "output_bytes " << bytes << "\nseconds " << fmt(secs, 6) << "\nthroughput_mbps "
      << fmt(secs > 0 ? throughput(bytes, secs) : 0.0) << "\n";
  return kExitOk;
}

// Rows are frames, columns are symbol probabilities.
Matrix frame_histograms(std::span<const Frame> frames) {
  Matrix m;
  for (const Frame& f : frames) {
    std::vector<double> row(256, 0.0);
    for (const std::uint8_t p : f.pixels) row[p] += 1;
    for (double& v : row) v /= static_cast<double>(f.pixels.size());
    m.push_back(std::move(row));
  }
  return m;
}

struct MetricsArgs {
  std::string original, decoded, cipher, key, report;
  double encode_seconds = 0, decode_seconds = 0;
};

int cmd_metrics(const MetricsArgs& a, std::ostream& out) {
  if (!a.cipher.empty() && a.key.empty()) throw UsageError("--cipher needs --key");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const RawVideo original = read_any_video(a.original);
  const RawVideo decoded = read_any_video(a.decoded);

  MetricsReport r;
  r.mse = mse(original.frames, decoded.frames);
  r.psnr = psnr_from_mse(r.mse);
  r.pil = pil(original.byte_size(), decoded.byte_size());
  try {
    r.cel = categorical_entropy_loss(frame_histograms(original.frames),
                                     frame_histograms(decoded.frames));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonPositiveProbability) throw;
    r.cel = std::numeric_limits<double>::infinity();
  }
  r.entropy = r.avalanche = r.bpc = r.compression_pct = nan;
  r.throughput_encode = r.throughput_decode = nan;

  std::uint64_t cipher_file_bytes = 0;
  if (!a.cipher.empty()) {
    const ChaosKey master = load_key(a.key);
    const Manifest manifest = read_manifest(a.cipher);
    std::vector<ChunkInput> inputs;
    ChunkPlan plan;
    for (const auto& e : manifest.entries) {
      inputs.push_back(load_chunk(a.cipher, e));
      cipher_file_bytes += inputs.back().container.size();
      plan.chunks.push_back({e.index, e.first_frame, e.frame_count, 0});
    }
    const auto stream = cipher_bytes(inputs);
    r.entropy = entropy(stream);
    r.avalanche = key_avalanche(stream, original, plan, master, manifest.order);
    r.bpc = bpc(cipher_file_bytes, original.byte_size());
    r.compression_pct = compression_pct(original.byte_size(), cipher_file_bytes);
  }
  if (a.encode_seconds > 0) {
    const std::uint64_t bytes = cipher_file_bytes ? cipher_file_bytes : original.byte_size();
    r.throughput_encode = throughput(bytes, a.encode_seconds);
  }
  if (a.decode_seconds > 0) r.throughput_decode = throughput(decoded.byte_size(), a.decode_seconds);

  out << "mse " << r.mse << "\npsnr " << r.psnr << " dB\npil " << r.pil << " %\nentropy "
      << r.entropy << " bits/byte\navalanche " << r.avalanche << " %\nthroughput_encode "
      << r.throughput_encode << " MB/s\nthroughput_decode " << r.throughput_decode
      << " MB/s\nbpc " << r.bpc << "\ncompression_pct " << r.compression_pct << " %\ncel "
      << r.cel << "\n";
  if (!a.report.empty()) {
    const MetricsReport rows[] = {r};
    write_csv_file(a.report, rows);
    out << "wrote " << a.report << "\n";
  }
  return kExitOk;
}

struct BenchArgs {
  std::uint32_t width = 256, height = 256;
  std::uint64_t frames = 256, seed = 1;
  std::string kind = "gradient", chunk_size = "1M", order = "cte", csv;
  std::vector<unsigned> workers{1, 2, 4, 8};
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const std::uint64_t chunk_size = checked_chunk_size(a.chunk_size);
  CorpusKind kind;
  try {
    kind = parse_corpus_kind(a.kind);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::vector<PipelineOrder> orders;
  if (a.order == "both") {
    orders = {PipelineOrder::EncryptThenCompress, PipelineOrder::CompressThenEncrypt};
  } else {
    try {
      orders = {parse_order(a.order)};
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  FrameMeta meta;
  meta.width = a.width;
  meta.height = a.height;
  meta.frame_count = a.frames;
  try {
    meta.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const RawVideo video = synth_corpus(kind, meta, a.seed);
  const ChaosKey master = generate_key(a.seed);
  ChunkPlan plan = plan_chunks(meta, chunk_size);

  std::string table = "order,workers,chunks,encode_mbps,decode_mbps,bpc,entropy,avalanche,identical\n";
  for (const PipelineOrder order : orders) {
    std::string reference;
    double avalanche_pct = 0;
    for (std::size_t i = 0; i < a.workers.size(); ++i) {
      const unsigned w = a.workers[i];
      if (w < 1) throw UsageError("worker counts must be >= 1");
      EncodeOptions eo;
      eo.order = order;
      eo.workers = w;
      auto t0 = Clock::now();
      auto enc = encode_chunks(plan, video, master, eo);
      const double enc_s = seconds_since(t0);
      require_all(enc);

      std::vector<EncodedChunk> chunks;
      std::vector<ChunkInput> inputs;
      std::string joined;
      for (auto& r : enc) {
        inputs.push_back({r.spec.index, r.spec.first_frame, r.value->container});
        joined += r.value->container;
        chunks.push_back(std::move(*r.value));
      }
      DecodeOptions d;
      d.workers = w;
      t0 = Clock::now();
      auto dec = decode_chunks(inputs, master, d);
      const double dec_s = seconds_since(t0);
      const RawVideo back = merge_decoded(dec);
      if (back.frames != video.frames) {
        throw Error(ErrorCode::CorruptChunk, "benchmark round trip does not match the corpus");
      }
      if (i == 0) {
        reference = joined;
        avalanche_pct = key_avalanche(cipher_bytes(chunks), video, plan, master, order);
      }
      const std::uint64_t out_bytes = total_container_bytes(chunks);
      const std::string row =
          std::string(to_string(order)) + "," + std::to_string(w) + "," +
          std::to_string(chunks.size()) + "," + fmt(throughput(out_bytes, std::max(enc_s, 1e-9))) + "," +
          fmt(throughput(back.byte_size(), std::max(dec_s, 1e-9))) + "," +
          fmt(bpc(out_bytes, video.byte_size()), 6) + "," + fmt(entropy(cipher_bytes(chunks)), 6) + "," +
          fmt(avalanche_pct, 4) + "," + (joined == reference ? "yes" : "no") + "\n";
      table += row;
      out << row << std::flush;
    }
  }
  if (!a.csv.empty()) {
    std::ofstream f(a.csv, std::ios::binary | std::ios::trunc);
    f << table;
    f.flush();
    if (!f) throw Error(ErrorCode::SinkFailure, "cannot write " + a.csv);
  }
  return kExitOk;
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::KeyOutOfRange:
    case ErrorCode::DegenerateOrbit:
    case ErrorCode::KeyDerivationFailed:
    case ErrorCode::KeyFileSyntax:
    case ErrorCode::KeyMismatch:
      return kExitKey;
    case ErrorCode::SinkFailure:
    case ErrorCode::SourceFailure:
      return kExitIo;
    case ErrorCode::BadMagic:
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::CorruptRecord:
    case ErrorCode::Truncated:
    case ErrorCode::OutOfOrderFrame:
    case ErrorCode::InvalidHeader:
    case ErrorCode::MissingChunk:
    case ErrorCode::CorruptChunk:
    case ErrorCode::TruncatedStream:
    case ErrorCode::TrailingBits:
    case ErrorCode::InvalidCodeword:
    case ErrorCode::InvalidCodeTable:
    case ErrorCode::SymbolNotInTable:
    case ErrorCode::PixelCountMismatch:
      return kExitCorrupt;
    default:
      return kExitParse;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chaotic-keystream video compression and encryption", "sdce"};
  app.require_subcommand(1);

  std::string keygen_out;
  std::uint64_t keygen_seed = 0;
  auto* keygen = app.add_subcommand("keygen", "Generate a key file");
  keygen->add_option("--out", keygen_out, "Key file to write")->required();
  auto* seed_opt = keygen->add_option("--seed", keygen_seed, "Deterministic seed");

  EncodeArgs ea;
  auto* encode = app.add_subcommand("encode", "Encode a Y4M/RGV video into chunk files and a manifest");
  encode->add_option("--input", ea.input)->required();
  encode->add_option("--key", ea.key)->required();
  encode->add_option("--output", ea.output, "Manifest path")->required();
  encode->add_option("--order", ea.order, "etc or cte")->capture_default_str();
  encode->add_option("--chunk-size", ea.chunk_size, "Bytes, K/M/G suffix allowed")->capture_default_str();
  encode->add_option("--workers", ea.workers)->capture_default_str();

  DecodeArgs da;
  auto* decode = app.add_subcommand("decode", "Decode a manifest back into a video");
  decode->add_option("--input", da.input, "Manifest path")->required();
  decode->add_option("--key", da.key)->required();
  decode->add_option("--output", da.output, "RGV file, or directory for pgm")->required();
  decode->add_option("--format", da.format, "rgv or pgm")->capture_default_str();
  decode->add_flag("--lenient", da.lenient, "Finish even when the key does not match");
  decode->add_option("--workers", da.workers)->capture_default_str();

  MetricsArgs ma;
  auto* metrics = app.add_subcommand("metrics", "Compare an original and a decoded video");
  metrics->add_option("--original", ma.original)->required();
  metrics->add_option("--decoded", ma.decoded)->required();
  metrics->add_option("--cipher", ma.cipher, "Manifest of the encoded chunks");
  metrics->add_option("--key", ma.key);
  metrics->add_option("--encode-seconds", ma.encode_seconds);
  metrics->add_option("--decode-seconds", ma.decode_seconds);
  metrics->add_option("--report", ma.report, "CSV file to write");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Benchmark a synthetic corpus over worker counts");
  bench->add_option("--width", ba.width)->capture_default_str();
  bench->add_option("--height", ba.height)->capture_default_str();
  bench->add_option("--frames", ba.frames)->capture_default_str();
  bench->add_option("--kind", ba.kind, "gradient, noise, constant or checker")->capture_default_str();
  bench->add_option("--chunk-size", ba.chunk_size)->capture_default_str();
  bench->add_option("--order", ba.order, "etc, cte or both")->capture_default_str();
  bench->add_option("--seed", ba.seed)->capture_default_str();
  bench->add_option("--workers", ba.workers, "Worker counts to run")->capture_default_str();
  bench->add_option("--csv", ba.csv, "Write the table here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*keygen) {
      return cmd_keygen(keygen_out, seed_opt->count() ? std::optional(keygen_seed) : std::nullopt, out);
    }
    if (*encode) return cmd_encode(ea, out);
    if (*decode) return cmd_decode(da, out);
    if (*metrics) return cmd_metrics(ma, out);
    if (*bench) return cmd_bench(ba, out);
  } catch (const UsageError& e) {
    err << "sdce: " << e.what() << "\n";
    return kExitParse;
  } catch (const Error& e) {
    err << "sdce: " << describe(e) << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "sdce: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace sdce::cli
