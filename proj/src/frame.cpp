#include "sdce/frame.hpp"

#include <string>

#include "sdce/error.hpp"

namespace sdce {

void FrameMeta::validate() const {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidHeader, "frame dimensions must be at least 1x1");
  }
  if (fps_num < 1 || fps_den < 1) {
    throw Error(ErrorCode::InvalidHeader, "frame rate terms must be at least 1");
  }
}

Frame::Frame(std::uint32_t w, std::uint32_t h, std::uint8_t fill)
    : width(w), height(h), pixels(std::size_t{w} * h, fill) {}

Frame::Frame(std::uint32_t w, std::uint32_t h, std::vector<std::uint8_t> data)
    : width(w), height(h), pixels(std::move(data)) {
  if (pixels.size() != std::size_t{w} * h) {
    throw Error(ErrorCode::MalformedFrame,
                "frame of " + std::to_string(w) + "x" + std::to_string(h) + " holds " +
                    std::to_string(pixels.size()) + " pixels");
  }
}

void RawVideo::validate() const {
  meta.validate();
  if (frames.size() != meta.frame_count) {
    throw Error(ErrorCode::MalformedFrame,
                "video declares " + std::to_string(meta.frame_count) + " frames but holds " +
                    std::to_string(frames.size()));
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    if (f.width != meta.width || f.height != meta.height ||
        f.pixels.size() != meta.pixels_per_frame()) {
      throw Error(ErrorCode::MalformedFrame, "frame does not match video dimensions", i);
    }
  }
}

}  // namespace sdce
