#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "motiondesk/clip.hpp"
#include "motiondesk/config.hpp"
#include "motiondesk/image.hpp"

namespace md {

enum class Split { train, test };

struct LabeledImage {
  GrayImage image;
  std::size_t label = 0;
  Split split = Split::train;
};

struct SourceVideo {
  std::size_t id = 0;
  std::vector<GrayImage> frames;
  // Generating class, known only for synthetic corpora; never used for training.
  std::optional<std::size_t> motion_class;
};

struct Corpus {
  std::size_t classes = 0;
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> test;
  std::vector<SourceVideo> videos;
};

// Key frames 0, interval, ..., (k-1)*interval of the source.
VideoClip sample_clip(std::span<const GrayImage> source, std::size_t k, std::size_t interval = 3,
                      std::size_t video_id = 0);

// Three clips of k-2 frames starting at frames 0, 1, 2; each keeps the
// parent's id and pseudo label.
std::array<VideoClip, 3> augment_clip(const VideoClip& clip);

// Samples one clip per source video.
std::vector<VideoClip> sample_clips(std::span<const SourceVideo> videos, std::size_t k, std::size_t interval);

/// Sprites over a textured background. Class c fixes both the sprite and its
/// motion: 0-3 a triangle pointing right/left/up/down that translates the
/// way it points, 4 a cross that rotates in place, 5 a bar that oscillates
/// horizontally. Labelled images are first frames of fresh instances.
/// Pixels are already 8-bit quantised, so the corpus survives a PGM round
/// trip unchanged.
Corpus generate_synthetic_corpus(const CorpusConfig& config);

// The first `frames` frames of a fresh instance of class cls.
std::vector<GrayImage> render_instance(const CorpusConfig& config, std::size_t cls, std::size_t frames,
                                       std::uint64_t seed);

}  // namespace md
