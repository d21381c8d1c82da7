#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sdce {

struct FrameMeta {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t fps_num = 25;
  std::uint32_t fps_den = 1;
  std::uint64_t frame_count = 0;

  std::size_t pixels_per_frame() const noexcept {
    return std::size_t{width} * std::size_t{height};
  }
  // Throws InvalidHeader unless width, height, fps_num and fps_den are >= 1.
  void validate() const;

  friend bool operator==(const FrameMeta&, const FrameMeta&) = default;
};

// One luma byte per pixel, row-major.
struct Frame {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(std::uint32_t w, std::uint32_t h, std::uint8_t fill = 0);
  // Throws MalformedFrame when pixels.size() != w * h.
  Frame(std::uint32_t w, std::uint32_t h, std::vector<std::uint8_t> data);

  std::uint8_t& at(std::uint32_t x, std::uint32_t y) { return pixels[std::size_t{y} * width + x]; }
  std::uint8_t at(std::uint32_t x, std::uint32_t y) const { return pixels[std::size_t{y} * width + x]; }
  std::span<const std::uint8_t> view() const noexcept { return pixels; }

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct RawVideo {
  FrameMeta meta;
  std::vector<Frame> frames;

  // Every frame matches meta dimensions and frame_count matches.
  void validate() const;
  std::uint64_t byte_size() const noexcept { return meta.pixels_per_frame() * frames.size(); }

  friend bool operator==(const RawVideo&, const RawVideo&) = default;
};

}  // namespace sdce
