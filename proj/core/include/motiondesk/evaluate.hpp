#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "motiondesk/clip.hpp"
#include "motiondesk/config.hpp"
#include "motiondesk/corpus.hpp"
#include "motiondesk/nets.hpp"

namespace md {

enum class EvalMode {
  fused,        // fusion head on [motion; visual]
  visual_only,  // visual head
  motion_only,  // motion-only head
};

std::string_view mode_name(EvalMode mode);
EvalMode parse_mode(std::string_view name);

// The classifier a variant ends with: fusion head after step 5 of `full`,
// motion-only head for `only_mr`, the visual head otherwise.
EvalMode final_mode(Variant variant);

struct EvalResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [true class][predicted class]
};

// Argmax class per image, ties to the lowest index.
std::vector<std::size_t> predict(ModelBundle& model, std::span<const GrayImage* const> images, EvalMode mode);

EvalResult evaluate(ModelBundle& model, std::span<const LabeledImage> test, EvalMode mode);

// Motion feature of an image: one recurrent step from the zero state.
std::vector<double> image_motion_feature(ModelBundle& model, const GrayImage& image);
// The same for the first frame of each clip, in clip order.
std::vector<std::vector<double>> first_frame_motion_features(ModelBundle& model, std::span<const VideoClip> clips);

struct Retrieval {
  std::size_t clip_index = 0;  // position in the clip list
  std::size_t clip_id = 0;     // VideoClip::video_id
  double distance = 0.0;
};

// Clip whose first-frame motion feature is nearest to the image's; ties go
// to the lowest position.
Retrieval retrieve_nearest_clip(ModelBundle& model, const GrayImage& image, std::span<const VideoClip> clips);
Retrieval nearest_feature(std::span<const double> query, std::span<const std::vector<double>> features,
                          std::span<const VideoClip> clips);

}  // namespace md
