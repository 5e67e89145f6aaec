#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "motiondesk/image.hpp"

namespace md {

/// Key frames sampled from one source video, in temporal order.
struct VideoClip {
  std::size_t video_id = 0;
  std::vector<GrayImage> frames;
  std::optional<std::size_t> pseudo_label;

  std::size_t length() const { return frames.size(); }
};

}  // namespace md
