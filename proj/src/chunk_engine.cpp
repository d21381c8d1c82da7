#include "sdce/chunk_engine.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "sdce/container_format.hpp"

namespace sdce {

namespace {

// Fixed pool pulling task indices from a shared counter. Each task writes
// only its own result slot.
void run_pool(std::size_t tasks, unsigned workers, FailurePolicy policy,
              const std::function<bool(std::size_t)>& task) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  const auto body = [&] {
    while (!abort.load(std::memory_order_acquire)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks) return;
      if (!task(i) && policy == FailurePolicy::AbortBatch) {
        abort.store(true, std::memory_order_release);
      }
    }
  };
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(std::max(workers, 1u), tasks));
  if (n <= 1) {
    body();
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(n);
  for (unsigned w = 0; w < n; ++w) pool.emplace_back(body);
}

template <typename T, typename Fn>
bool capture(ChunkResult<T>& slot, Fn&& fn) {
  try {
    slot.value = fn();
    return true;
  } catch (const Error& e) {
    slot.error = e.chunk() ? e : e.with_chunk(slot.spec.index);
  } catch (const std::exception& e) {
    slot.error = Error(ErrorCode::CorruptChunk, e.what(), std::nullopt, slot.spec.index);
  }
  return false;
}

bool is_framing_error(ErrorCode code) {
  return code == ErrorCode::TruncatedStream || code == ErrorCode::TrailingBits ||
         code == ErrorCode::InvalidCodeword;
}

std::string_view status_name(ChunkStatus s) {
  switch (s) {
    case ChunkStatus::Ok: return "ok";
    case ChunkStatus::Failed: return "failed";
    case ChunkStatus::Pending: return "pending";
  }
  return "pending";
}

ChunkStatus parse_status(std::string_view s) {
  if (s == "ok") return ChunkStatus::Ok;
  if (s == "failed") return ChunkStatus::Failed;
  if (s == "pending") return ChunkStatus::Pending;
  throw Error(ErrorCode::CorruptChunk, "unknown chunk status '" + std::string(s) + "'");
}

template <typename T>
T parse_number(std::string_view text, int base = 10) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, base);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::CorruptChunk, "bad manifest number '" + std::string(text) + "'");
  }
  return v;
}

// Splits "key=value key=value ..." into pairs.
std::vector<std::pair<std::string, std::string>> fields_of(const std::string& line) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }
  return out;
}

const std::string& field(const std::vector<std::pair<std::string, std::string>>& f,
                         std::string_view name) {
  for (const auto& [k, v] : f) {
    if (k == name) return v;
  }
  throw Error(ErrorCode::CorruptChunk, "manifest line lacks '" + std::string(name) + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SourceFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::uint32_t crc_of(const std::string& bytes) {
  return crc32(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

}  // namespace

ChunkPlan plan_chunks(const FrameMeta& meta, std::uint64_t chunk_size) {
  meta.validate();
  const std::uint64_t frame_bytes = meta.pixels_per_frame();
  if (chunk_size < frame_bytes) {
    throw Error(ErrorCode::ChunkTooSmall, "chunk size " + std::to_string(chunk_size) +
                                              " is smaller than one frame (" +
                                              std::to_string(frame_bytes) + " bytes)");
  }
  const std::uint64_t per_chunk = chunk_size / frame_bytes;
  ChunkPlan plan{chunk_size, {}};
  for (std::uint64_t first = 0; first < meta.frame_count; first += per_chunk) {
    ChunkSpec spec;
    spec.index = static_cast<std::uint32_t>(plan.chunks.size());
    spec.first_frame = first;
    spec.frame_count = std::min(per_chunk, meta.frame_count - first);
    plan.chunks.push_back(spec);
  }
  return plan;
}

void assign_chunk_keys(ChunkPlan& plan, const ChaosKey& master) {
  for (ChunkSpec& c : plan.chunks) {
    c.key_fingerprint = key_fingerprint(derive_chunk_key(master, c.index));
  }
}

std::vector<ChunkResult<EncodedChunk>> encode_chunks(const ChunkPlan& plan,
                                                     const RawVideo& video,
                                                     const ChaosKey& master,
                                                     const EncodeOptions& options) {
  video.validate();
  std::vector<ChunkResult<EncodedChunk>> results(plan.chunks.size());
  for (std::size_t i = 0; i < results.size(); ++i) results[i].spec = plan.chunks[i];

  run_pool(results.size(), options.workers, options.policy, [&](std::size_t i) {
    auto& slot = results[i];
    return capture(slot, [&] {
      const ChunkSpec& spec = slot.spec;
      if (spec.first_frame + spec.frame_count > video.frames.size()) {
        throw Error(ErrorCode::MissingChunk, "chunk range exceeds the video", std::nullopt,
                    spec.index);
      }
      const ChaosKey key = derive_chunk_key(master, spec.index);
      const auto frames = std::span(video.frames).subspan(spec.first_frame, spec.frame_count);
      const auto encoded = encode_sequence(frames, key, options.order, options.burn_in);
      std::vector<FrameRecord> records;
      records.reserve(encoded.size());
      for (const auto& e : encoded) records.push_back(FrameRecord::from(e));
      const auto header = ContainerHeader::for_chunk(video.meta, spec.frame_count, options.order,
                                                     spec.index, options.burn_in);
      EncodedChunk out{spec, options.order, serialize_container(header, records)};
      out.spec.key_fingerprint = key_fingerprint(key);
      return out;
    });
  });
  return results;
}

DecodedChunk decode_chunk(const ChunkInput& chunk, const ChaosKey& master, DecodeMode mode) {
  const Container c = parse_container(chunk.container);
  if (c.header.chunk_index != chunk.index) {
    throw Error(ErrorCode::CorruptChunk,
                "container holds chunk " + std::to_string(c.header.chunk_index), std::nullopt,
                chunk.index);
  }
  const ChaosKey key = derive_chunk_key(master, chunk.index);
  const FrameMeta meta = c.header.meta();

  DecodedChunk out;
  out.spec = {chunk.index, chunk.first_frame, c.header.frame_count, key_fingerprint(key)};
  out.meta = meta;
  out.frames.reserve(c.records.size());
  ChaosState state = stream_start(key, c.header.burn_in);
  for (const FrameRecord& r : c.records) {
    try {
      auto step = decode_frame(r.to_encoded(c.header.order), state, key, meta, mode);
      state = step.state;
      out.frames.push_back(std::move(step.frame));
    } catch (const Error& e) {
      if (c.header.order == PipelineOrder::CompressThenEncrypt && is_framing_error(e.code())) {
        throw Error(ErrorCode::KeyMismatch,
                    "record verified but does not decode under this key (" +
                        std::string(to_string(e.code())) + ")",
                    r.frame_index, chunk.index);
      }
      throw Error(e.code(), e.what(), r.frame_index, chunk.index);
    }
  }
  return out;
}

std::vector<ChunkResult<DecodedChunk>> decode_chunks(std::span<const ChunkInput> chunks,
                                                     const ChaosKey& master,
                                                     const DecodeOptions& options) {
  std::vector<ChunkResult<DecodedChunk>> results(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    results[i].spec.index = chunks[i].index;
    results[i].spec.first_frame = chunks[i].first_frame;
  }
  run_pool(results.size(), options.workers, options.policy, [&](std::size_t i) {
    return capture(results[i], [&] { return decode_chunk(chunks[i], master, options.mode); });
  });
  std::stable_sort(results.begin(), results.end(),
                   [](const auto& a, const auto& b) { return a.spec.index < b.spec.index; });
  return results;
}

RawVideo merge_decoded(std::span<const DecodedChunk> chunks) {
  std::vector<const DecodedChunk*> order;
  for (const auto& c : chunks) order.push_back(&c);
  std::sort(order.begin(), order.end(),
            [](const DecodedChunk* a, const DecodedChunk* b) { return a->spec.index < b->spec.index; });

  RawVideo video;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const DecodedChunk& c = *order[i];
    if (c.spec.index != i) {
      throw Error(ErrorCode::MissingChunk, "chunk " + std::to_string(i) + " is missing",
                  std::nullopt, static_cast<std::uint32_t>(i));
    }
    if (i == 0) {
      video.meta = c.meta;
      video.meta.frame_count = 0;
    } else if (c.meta.width != video.meta.width || c.meta.height != video.meta.height) {
      throw Error(ErrorCode::CorruptChunk, "chunk dimensions disagree", std::nullopt, c.spec.index);
    }
    if (c.spec.first_frame != video.frames.size()) {
      throw Error(ErrorCode::MissingChunk, "frames before chunk " + std::to_string(i) + " are missing",
                  std::nullopt, c.spec.index);
    }
    video.frames.insert(video.frames.end(), c.frames.begin(), c.frames.end());
  }
  video.meta.frame_count = video.frames.size();
  return video;
}

RawVideo merge_decoded(const std::vector<ChunkResult<DecodedChunk>>& results) {
  require_all(results);
  std::vector<DecodedChunk> chunks;
  chunks.reserve(results.size());
  for (const auto& r : results) chunks.push_back(*r.value);
  return merge_decoded(chunks);
}

bool Manifest::complete() const noexcept {
  return std::all_of(entries.begin(), entries.end(),
                     [](const ManifestEntry& e) { return e.status == ChunkStatus::Ok; });
}

std::string format_manifest(const Manifest& m) {
  std::ostringstream out;
  out << "# sdce-manifest v1 width=" << m.meta.width << " height=" << m.meta.height
      << " fps=" << m.meta.fps_num << '/' << m.meta.fps_den << " frames=" << m.meta.frame_count
      << " order=" << to_string(m.order) << '\n';
  for (const auto& e : m.entries) {
    char crc[9];
    std::snprintf(crc, sizeof crc, "%08x", e.crc32);
    out << "index=" << e.index << " frames=" << e.first_frame << ".."
        << e.first_frame + e.frame_count << " path=" << e.path << " status="
        << status_name(e.status) << " crc32=" << crc << '\n';
  }
  return std::move(out).str();
}

Manifest parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# sdce-manifest v1", 0) != 0) {
    throw Error(ErrorCode::CorruptChunk, "not an sdce manifest");
  }
  Manifest m;
  const auto head = fields_of(line);
  m.meta.width = parse_number<std::uint32_t>(field(head, "width"));
  m.meta.height = parse_number<std::uint32_t>(field(head, "height"));
  const std::string& fps = field(head, "fps");
  const auto slash = fps.find('/');
  if (slash == std::string::npos) throw Error(ErrorCode::CorruptChunk, "manifest fps needs num/den");
  m.meta.fps_num = parse_number<std::uint32_t>(std::string_view(fps).substr(0, slash));
  m.meta.fps_den = parse_number<std::uint32_t>(std::string_view(fps).substr(slash + 1));
  m.meta.frame_count = parse_number<std::uint64_t>(field(head, "frames"));
  try {
    m.order = parse_order(field(head, "order"));
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::CorruptChunk, e.what());
  }

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = fields_of(line);
    ManifestEntry e;
    e.index = parse_number<std::uint32_t>(field(f, "index"));
    const std::string& range = field(f, "frames");
    const auto dots = range.find("..");
    if (dots == std::string::npos) throw Error(ErrorCode::CorruptChunk, "manifest frame range needs a..b");
    e.first_frame = parse_number<std::uint64_t>(std::string_view(range).substr(0, dots));
    const auto end = parse_number<std::uint64_t>(std::string_view(range).substr(dots + 2));
    if (end < e.first_frame) throw Error(ErrorCode::CorruptChunk, "manifest frame range is reversed");
    e.frame_count = end - e.first_frame;
    e.path = field(f, "path");
    e.status = parse_status(field(f, "status"));
    e.crc32 = parse_number<std::uint32_t>(field(f, "crc32"), 16);
    m.entries.push_back(std::move(e));
  }
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path));
}

std::filesystem::path chunk_file_path(const std::filesystem::path& manifest_path,
                                      std::uint32_t index) {
  char suffix[32];
  std::snprintf(suffix, sizeof suffix, ".%06u.sdce", index);
  auto stem = manifest_path.stem().string();
  return manifest_path.parent_path() / (stem + suffix);
}

Manifest write_chunk_set(const std::filesystem::path& manifest_path, const FrameMeta& meta,
                         PipelineOrder order,
                         const std::vector<ChunkResult<EncodedChunk>>& results) {
  Manifest m;
  m.meta = meta;
  m.order = order;
  if (manifest_path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(manifest_path.parent_path(), ec);
  }
  for (const auto& r : results) {
    ManifestEntry e;
    e.index = r.spec.index;
    e.first_frame = r.spec.first_frame;
    e.frame_count = r.spec.frame_count;
    const auto path = chunk_file_path(manifest_path, r.spec.index);
    e.path = path.filename().string();
    if (r.value) {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out.write(r.value->container.data(), static_cast<std::streamsize>(r.value->container.size()));
      out.flush();
      if (!out) throw Error(ErrorCode::SinkFailure, "cannot write " + path.string(), std::nullopt, e.index);
      e.status = ChunkStatus::Ok;
      e.crc32 = crc_of(r.value->container);
    } else {
      e.status = r.error ? ChunkStatus::Failed : ChunkStatus::Pending;
    }
    m.entries.push_back(std::move(e));
  }
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  out << format_manifest(m);
  out.flush();
  if (!out) throw Error(ErrorCode::SinkFailure, "cannot write " + manifest_path.string());
  return m;
}

ChunkInput load_chunk(const std::filesystem::path& manifest_path, const ManifestEntry& entry) {
  if (entry.status != ChunkStatus::Ok) {
    throw Error(ErrorCode::MissingChunk,
                "manifest marks chunk " + std::to_string(entry.index) + " as " +
                    std::string(status_name(entry.status)),
                std::nullopt, entry.index);
  }
  const auto path = manifest_path.parent_path() / entry.path;
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::MissingChunk, "chunk file " + path.string() + " does not exist",
                std::nullopt, entry.index);
  }
  ChunkInput in{entry.index, entry.first_frame, read_file(path)};
  if (crc_of(in.container) != entry.crc32) {
    throw Error(ErrorCode::CorruptChunk, "chunk file " + path.string() + " fails its manifest CRC",
                std::nullopt, entry.index);
  }
  return in;
}

}  // namespace sdce
