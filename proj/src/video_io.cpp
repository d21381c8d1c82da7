#include "sdce/video_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdce/error.hpp"

namespace sdce {

namespace {

constexpr std::string_view kY4mSignature = "YUV4MPEG2";
constexpr std::array<char, 4> kRgvMagic{'R', 'G', 'V', '1'};
constexpr std::size_t kMaxHeaderLine = 4096;
constexpr std::uint64_t kMaxFramePixels = std::uint64_t{1} << 30;

void check_frame_size(std::uint32_t w, std::uint32_t h) {
  if (std::uint64_t{w} * h > kMaxFramePixels) {
    throw Error(ErrorCode::HeaderSyntax, "frame of " + std::to_string(w) + "x" +
                                             std::to_string(h) + " exceeds 2^30 pixels");
  }
}

enum class Chroma { C420, Mono };

bool read_line(std::istream& in, std::string& line) {
  line.clear();
  char c = 0;
  while (in.get(c)) {
    if (c == '\n') return true;
    line.push_back(c);
    if (line.size() > kMaxHeaderLine) {
      throw Error(ErrorCode::HeaderSyntax, "Y4M header line is too long");
    }
  }
  return false;
}

std::uint32_t parse_u32(std::string_view text, std::string_view what) {
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::HeaderSyntax, "bad " + std::string(what) + " value '" +
                                             std::string(text) + "'");
  }
  return v;
}

void read_exact(std::istream& in, std::uint8_t* dst, std::size_t n, std::uint64_t frame) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw Error(ErrorCode::TruncatedFrame, "stream ends inside frame " + std::to_string(frame),
                frame);
  }
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v), static_cast<char>(v >> 8),
                              static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
         std::uint32_t{p[3]} << 24;
}

void check_sink(const std::ostream& out, const std::string& what) {
  if (!out) throw Error(ErrorCode::SinkFailure, "failed writing " + what);
}

// PGM header tokens, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) return tok;
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  return tok;
}

}  // namespace

RawVideo parse_y4m(std::istream& source) {
  std::string line;
  const bool complete = read_line(source, line);
  if (line.compare(0, kY4mSignature.size(), kY4mSignature) != 0 ||
      (line.size() > kY4mSignature.size() && line[kY4mSignature.size()] != ' ')) {
    throw Error(ErrorCode::BadSignature, "stream does not start with YUV4MPEG2");
  }
  if (!complete) throw Error(ErrorCode::HeaderSyntax, "Y4M header is not newline-terminated");

  RawVideo video;
  bool have_w = false, have_h = false, have_f = false;
  Chroma chroma = Chroma::C420;
  std::istringstream tags(line.substr(kY4mSignature.size()));
  std::string tag;
  while (tags >> tag) {
    const std::string_view value = std::string_view(tag).substr(1);
    switch (tag[0]) {
      case 'W':
        video.meta.width = parse_u32(value, "width");
        have_w = true;
        break;
      case 'H':
        video.meta.height = parse_u32(value, "height");
        have_h = true;
        break;
      case 'F': {
        const auto colon = value.find(':');
        if (colon == std::string_view::npos) throw Error(ErrorCode::HeaderSyntax, "F tag needs num:den");
        video.meta.fps_num = parse_u32(value.substr(0, colon), "frame rate");
        video.meta.fps_den = parse_u32(value.substr(colon + 1), "frame rate");
        have_f = true;
        break;
      }
      case 'C':
        if (value == "mono") {
          chroma = Chroma::Mono;
        } else if (value == "420" || value == "420jpeg" || value == "420paldv" ||
                   value == "420mpeg2") {
          chroma = Chroma::C420;
        } else {
          throw Error(ErrorCode::UnsupportedColorspace,
                      "colorspace C" + std::string(value) + " is not supported");
        }
        break;
      case 'I':
      case 'A':
      case 'X':
        break;
      default:
        throw Error(ErrorCode::HeaderSyntax, "unknown Y4M tag '" + tag + "'");
    }
  }
  if (!have_w || !have_h || !have_f) {
    throw Error(ErrorCode::HeaderSyntax, "Y4M header needs W, H and F tags");
  }
  if (video.meta.width == 0 || video.meta.height == 0 || video.meta.fps_num == 0 ||
      video.meta.fps_den == 0) {
    throw Error(ErrorCode::HeaderSyntax, "Y4M dimensions and frame rate must be positive");
  }
  check_frame_size(video.meta.width, video.meta.height);

  const std::size_t luma = video.meta.pixels_per_frame();
  const std::size_t chroma_bytes =
      chroma == Chroma::Mono
          ? 0
          : 2 * (std::size_t{(video.meta.width + 1) / 2} * ((video.meta.height + 1) / 2));
  std::vector<std::uint8_t> skip(chroma_bytes);

  while (true) {
    if (source.peek() == std::char_traits<char>::eof()) break;
    const std::uint64_t index = video.frames.size();
    const bool ok = read_line(source, line);
    if (line.compare(0, 5, "FRAME") != 0 || (line.size() > 5 && line[5] != ' ')) {
      throw Error(ErrorCode::HeaderSyntax, "expected FRAME marker", index);
    }
    if (!ok) throw Error(ErrorCode::TruncatedFrame, "stream ends after FRAME marker", index);
    Frame f(video.meta.width, video.meta.height);
    read_exact(source, f.pixels.data(), luma, index);
    if (chroma_bytes > 0) read_exact(source, skip.data(), chroma_bytes, index);
    video.frames.push_back(std::move(f));
  }
  video.meta.frame_count = video.frames.size();
  return video;
}

void write_y4m(const RawVideo& video, std::ostream& sink) {
  video.validate();
  sink << "YUV4MPEG2 W" << video.meta.width << " H" << video.meta.height << " F"
       << video.meta.fps_num << ':' << video.meta.fps_den << " Ip A1:1 Cmono\n";
  for (const Frame& f : video.frames) {
    sink << "FRAME\n";
    sink.write(reinterpret_cast<const char*>(f.pixels.data()),
               static_cast<std::streamsize>(f.pixels.size()));
  }
  check_sink(sink, "Y4M stream");
}

RawVideo read_rgv(std::istream& source) {
  std::array<std::uint8_t, kRgvHeaderSize> h{};
  source.read(reinterpret_cast<char*>(h.data()), h.size());
  const auto got = static_cast<std::size_t>(source.gcount());
  if (got < 4 || !std::equal(kRgvMagic.begin(), kRgvMagic.end(), h.begin())) {
    throw Error(ErrorCode::BadSignature, "stream does not start with RGV1");
  }
  if (got != h.size()) throw Error(ErrorCode::HeaderSyntax, "RGV1 header is truncated");
  RawVideo video;
  video.meta.width = get_u32(&h[4]);
  video.meta.height = get_u32(&h[8]);
  video.meta.fps_num = get_u32(&h[12]);
  video.meta.fps_den = get_u32(&h[16]);
  video.meta.frame_count = get_u32(&h[20]);
  try {
    video.meta.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::HeaderSyntax, e.what());
  }
  check_frame_size(video.meta.width, video.meta.height);
  for (std::uint64_t i = 0; i < video.meta.frame_count; ++i) {
    Frame f(video.meta.width, video.meta.height);
    read_exact(source, f.pixels.data(), f.pixels.size(), i);
    video.frames.push_back(std::move(f));
  }
  if (source.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::HeaderSyntax, "bytes follow the declared RGV1 frames");
  }
  return video;
}

void write_rgv(const RawVideo& video, std::ostream& sink) {
  video.validate();
  if (video.meta.frame_count > 0xFFFFFFFFull) {
    throw Error(ErrorCode::SinkFailure, "RGV1 holds at most 2^32-1 frames");
  }
  sink.write(kRgvMagic.data(), 4);
  put_u32(sink, video.meta.width);
  put_u32(sink, video.meta.height);
  put_u32(sink, video.meta.fps_num);
  put_u32(sink, video.meta.fps_den);
  put_u32(sink, static_cast<std::uint32_t>(video.meta.frame_count));
  for (const Frame& f : video.frames) {
    sink.write(reinterpret_cast<const char*>(f.pixels.data()),
               static_cast<std::streamsize>(f.pixels.size()));
  }
  check_sink(sink, "RGV1 stream");
}

RawVideo read_video_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SourceFailure, "cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  in.clear();
  in.seekg(0);
  if (magic == kRgvMagic) return read_rgv(in);
  return parse_y4m(in);
}

void write_rgv_file(const RawVideo& video, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::SinkFailure, "cannot create " + path.string());
  write_rgv(video, out);
  out.flush();
  check_sink(out, path.string());
}

std::size_t write_pgm_sequence(const RawVideo& video, const std::filesystem::path& dir) {
  video.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::SinkFailure, "cannot create directory " + dir.string());
  std::size_t written = 0;
  for (const Frame& f : video.frames) {
    std::array<char, 32> name{};
    std::snprintf(name.data(), name.size(), "frame_%06zu.pgm", written);
    const auto path = dir / name.data();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "P5\n" << f.width << ' ' << f.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(f.pixels.data()),
              static_cast<std::streamsize>(f.pixels.size()));
    out.flush();
    check_sink(out, path.string());
    ++written;
  }
  return written;
}

Frame read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SourceFailure, "cannot open " + path.string());
  if (pgm_token(in) != "P5") throw Error(ErrorCode::BadSignature, path.string() + " is not a binary PGM");
  const auto w = parse_u32(pgm_token(in), "PGM width");
  const auto h = parse_u32(pgm_token(in), "PGM height");
  const auto maxval = parse_u32(pgm_token(in), "PGM maxval");
  if (maxval != 255 || w == 0 || h == 0) {
    throw Error(ErrorCode::HeaderSyntax, path.string() + ": only 8-bit PGM is supported");
  }
  check_frame_size(w, h);
  Frame f(w, h);
  read_exact(in, f.pixels.data(), f.pixels.size(), 0);
  return f;
}

std::string_view to_string(CorpusKind kind) noexcept {
  switch (kind) {
    case CorpusKind::Gradient: return "gradient";
    case CorpusKind::Noise: return "noise";
    case CorpusKind::Constant: return "constant";
    case CorpusKind::Checker: return "checker";
  }
  return "?";
}

CorpusKind parse_corpus_kind(std::string_view text) {
  for (auto k : {CorpusKind::Gradient, CorpusKind::Noise, CorpusKind::Constant, CorpusKind::Checker}) {
    if (text == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown corpus kind '" + std::string(text) + "'");
}

RawVideo synth_corpus(CorpusKind kind, const FrameMeta& meta, std::uint64_t seed) {
  meta.validate();
  RawVideo video{meta, {}};
  video.frames.reserve(meta.frame_count);
  std::mt19937_64 rng(seed);
  for (std::uint64_t t = 0; t < meta.frame_count; ++t) {
    Frame f(meta.width, meta.height);
    for (std::uint32_t y = 0; y < meta.height; ++y) {
      for (std::uint32_t x = 0; x < meta.width; ++x) {
        std::uint8_t v = 0;
        switch (kind) {
          case CorpusKind::Gradient:
            v = static_cast<std::uint8_t>(
                std::min<std::uint64_t>(255, std::uint64_t{x} + y + (t % 32)));
            break;
          case CorpusKind::Noise:
            break;
          case CorpusKind::Constant:
            v = 128;
            break;
          case CorpusKind::Checker:
            v = (((x / 8) + (y / 8) + t) % 2 == 0) ? 32 : 224;
            break;
        }
        f.at(x, y) = v;
      }
    }
    if (kind == CorpusKind::Noise) {
      for (std::size_t i = 0; i < f.pixels.size(); i += 8) {
        const std::uint64_t r = rng();
        for (std::size_t b = 0; b < 8 && i + b < f.pixels.size(); ++b) {
          f.pixels[i + b] = static_cast<std::uint8_t>(r >> (8 * b));
        }
      }
    }
    video.frames.push_back(std::move(f));
  }
  return video;
}

}  // namespace sdce
