#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "motiondesk/losses.hpp"
#include "motiondesk/nets.hpp"
#include "motiondesk/optim.hpp"
#include "motiondesk/vlad.hpp"

namespace md {

enum class Variant { full, unreg, unreg_motion, unreg_smooth1, unreg_smooth2, no_mra, only_mr };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);
std::vector<Variant> all_variants();

struct CorpusConfig {
  std::size_t classes = 6;
  std::size_t train_images_per_class = 10;
  std::size_t test_images_per_class = 20;
  std::size_t videos = 60;
  std::size_t video_frames = 40;
  std::size_t frame_size = 32;
  double sprite_radius_min = 4.0;
  double sprite_radius_max = 6.0;
  double motion_speed = 0.35;  // pixels per source frame
  double noise = 0.25;         // amplitude of the per-video background texture
  double orientation_jitter = 0.35;  // radians
  bool static_videos = false;  // sprites never move
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainConfig {
  std::size_t k = 12;        // key frames per clip
  std::size_t interval = 3;  // source-frame stride between key frames
  std::size_t delta_t = 10;  // window duration
  std::size_t motion_classes = 8;  // K
  NetDims dims{32, 8, 16, 64, 32, 6, 8};
  MarginConfig margin;
  std::size_t iterations[5] = {300, 200, 300, 200, 200};
  std::size_t image_batch = 16;
  std::size_t clip_batch = 4;
  std::size_t negatives_per_positive = 1;
  std::size_t corrupted_per_tuple = 1;
  LrSchedule schedule{1e-3, 0.1, 180};
  Variant variant = Variant::full;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FeatureConfig {
  HandcraftedSettings handcrafted{{}, 16};
  std::uint64_t pseudo_label_seed = 0;
};

struct RunConfig {
  CorpusConfig corpus;
  FeatureConfig features;
  TrainConfig train;
  std::filesystem::path dataset_dir = "data";
  std::vector<Variant> ablation_variants = {Variant::unreg, Variant::unreg_motion, Variant::unreg_smooth1,
                                            Variant::unreg_smooth2, Variant::full};
  std::vector<std::uint64_t> ablation_seeds = {0, 1, 2, 3, 4};

  void validate() const;
};

/// Applies `key = value` lines (with # comments) onto base. Unknown keys,
/// malformed lines and unparsable values throw ConfigError naming the key.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
// Every key with its current value, one per line; parse_config round-trips it.
std::string format_config(const RunConfig& config);

}  // namespace md
