#include "motiondesk/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "motiondesk/error.hpp"
#include "motiondesk/rng.hpp"

namespace md {

VideoClip sample_clip(std::span<const GrayImage> source, std::size_t k, std::size_t interval, std::size_t video_id) {
  if (k == 0 || interval == 0) throw ConfigError("sample_clip: k and interval must be positive");
  const std::size_t needed = (k - 1) * interval + 1;
  if (source.size() < needed) {
    throw Error("sample_clip: video " + std::to_string(video_id) + " has " + std::to_string(source.size()) +
                " frames, needs at least " + std::to_string(needed) + " for k = " + std::to_string(k) +
                " at interval " + std::to_string(interval));
  }
  VideoClip clip;
  clip.video_id = video_id;
  for (std::size_t i = 0; i < k; ++i) clip.frames.push_back(source[i * interval]);
  for (const GrayImage& f : clip.frames) {
    if (f.width != clip.frames.front().width || f.height != clip.frames.front().height) {
      throw ShapeError("sample_clip: video " + std::to_string(video_id) + " mixes frame sizes");
    }
  }
  return clip;
}

std::array<VideoClip, 3> augment_clip(const VideoClip& clip) {
  const std::size_t k = clip.length();
  if (k < 4) throw Error("augment_clip: clip has " + std::to_string(k) + " frames, needs at least 4");
  std::array<VideoClip, 3> out;
  for (std::size_t s = 0; s < 3; ++s) {
    out[s].video_id = clip.video_id;
    out[s].pseudo_label = clip.pseudo_label;
    out[s].frames.assign(clip.frames.begin() + static_cast<long>(s), clip.frames.begin() + static_cast<long>(s + k - 2));
  }
  return out;
}

std::vector<VideoClip> sample_clips(std::span<const SourceVideo> videos, std::size_t k, std::size_t interval) {
  std::vector<VideoClip> clips;
  clips.reserve(videos.size());
  for (const SourceVideo& v : videos) clips.push_back(sample_clip(v.frames, k, interval, v.id));
  return clips;
}

namespace {

enum class Shape2D { triangle, cross, bar };

struct Instance {
  Shape2D shape = Shape2D::triangle;
  double radius = 5.0;
  double cx = 0.0, cy = 0.0;  // centre at t = 0
  double vx = 0.0, vy = 0.0;  // translation per frame
  double angle = 0.0;         // orientation at t = 0
  double spin = 0.0;          // radians per frame
  double amplitude = 0.0;     // horizontal oscillation
  double period = 1.0;
  double phase = 0.0;
  double background = 0.3;
  double foreground = 0.8;
};

bool inside(Shape2D shape, double u, double v) {
  switch (shape) {
    case Shape2D::triangle: {
      // Vertices (1, 0), (-0.6, 0.75), (-0.6, -0.75): apex along +u.
      if (u < -0.6) return false;
      const double half_width = 0.75 * (1.0 - u) / 1.6;
      return std::abs(v) <= half_width;
    }
    case Shape2D::cross:
      return (std::abs(u) <= 0.28 && std::abs(v) <= 1.0) || (std::abs(v) <= 0.28 && std::abs(u) <= 1.0);
    case Shape2D::bar:
      return std::abs(u) <= 1.0 && std::abs(v) <= 0.3;
  }
  return false;
}

// Centre and orientation at frame t.
void pose(const Instance& s, double t, double& cx, double& cy, double& angle) {
  cx = s.cx + s.vx * t + s.amplitude * (std::sin(2.0 * std::numbers::pi * t / s.period + s.phase) - std::sin(s.phase));
  cy = s.cy + s.vy * t;
  angle = s.angle + s.spin * t;
}

GrayImage background(std::size_t size, double level, double noise, Rng& rng) {
  GrayImage raw(size, size);
  for (double& p : raw.pixels) p = rng.uniform() - 0.5;
  GrayImage out(size, size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      double acc = 0.0;
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dx = -1; dx <= 1; ++dx) acc += raw.clamped(static_cast<long>(x) + dx, static_cast<long>(y) + dy);
      }
      out.at(x, y) = level + noise * acc / 9.0 * 3.0;
    }
  }
  return out;
}

GrayImage render(const Instance& s, const GrayImage& bg, double t) {
  constexpr int kSub = 4;
  double cx = 0, cy = 0, angle = 0;
  pose(s, t, cx, cy, angle);
  const double c = std::cos(angle), sn = std::sin(angle);
  GrayImage out = bg;
  const long lo_x = std::max(0L, static_cast<long>(std::floor(cx - s.radius - 1)));
  const long hi_x = std::min(static_cast<long>(bg.width) - 1, static_cast<long>(std::ceil(cx + s.radius + 1)));
  const long lo_y = std::max(0L, static_cast<long>(std::floor(cy - s.radius - 1)));
  const long hi_y = std::min(static_cast<long>(bg.height) - 1, static_cast<long>(std::ceil(cy + s.radius + 1)));
  for (long y = lo_y; y <= hi_y; ++y) {
    for (long x = lo_x; x <= hi_x; ++x) {
      int hits = 0;
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const double px = static_cast<double>(x) + (sx + 0.5) / kSub - cx;
          const double py = static_cast<double>(y) + (sy + 0.5) / kSub - cy;
          const double u = (c * px + sn * py) / s.radius;
          const double v = (-sn * px + c * py) / s.radius;
          hits += inside(s.shape, u, v);
        }
      }
      const double alpha = static_cast<double>(hits) / (kSub * kSub);
      double& p = out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      p = (1.0 - alpha) * p + alpha * s.foreground;
    }
  }
  for (double& p : out.pixels) p = std::clamp(p, 0.0, 1.0);
  return quantize_8bit(out);
}

Instance make_instance(const CorpusConfig& cfg, std::size_t cls, std::size_t frames, Rng& rng) {
  Instance s;
  const double size = static_cast<double>(cfg.frame_size);
  const double speed = cfg.static_videos ? 0.0 : cfg.motion_speed;
  const double duration = static_cast<double>(frames > 0 ? frames - 1 : 0);
  s.radius = rng.uniform(cfg.sprite_radius_min, cfg.sprite_radius_max);
  s.background = rng.uniform(0.2, 0.4);
  s.foreground = s.background + rng.uniform(0.3, 0.55);
  const double jitter = rng.uniform(-cfg.orientation_jitter, cfg.orientation_jitter);
  // Extents of the centre's travel along x and y, relative to its start.
  double min_dx = 0, max_dx = 0, min_dy = 0, max_dy = 0;
  if (cls < 4) {
    s.shape = Shape2D::triangle;
    constexpr double kHeading[4] = {0.0, std::numbers::pi, -std::numbers::pi / 2, std::numbers::pi / 2};
    s.angle = kHeading[cls] + jitter;
    s.vx = speed * std::cos(kHeading[cls]);
    s.vy = speed * std::sin(kHeading[cls]);
    if (std::abs(s.vx) < 1e-12) s.vx = 0.0;
    if (std::abs(s.vy) < 1e-12) s.vy = 0.0;
    min_dx = std::min(0.0, s.vx * duration);
    max_dx = std::max(0.0, s.vx * duration);
    min_dy = std::min(0.0, s.vy * duration);
    max_dy = std::max(0.0, s.vy * duration);
  } else if (cls == 4) {
    s.shape = Shape2D::cross;
    s.angle = rng.uniform(0.0, std::numbers::pi / 2);
    s.spin = (rng.below(2) == 0 ? 1.0 : -1.0) * speed / s.radius;
  } else {
    s.shape = Shape2D::bar;
    s.angle = jitter * 0.5;
    s.amplitude = speed == 0.0 ? 0.0 : 3.0;
    s.period = 2.0 * std::numbers::pi * 3.0 / std::max(speed, 1e-9);
    s.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    min_dx = -2.0 * s.amplitude;
    max_dx = 2.0 * s.amplitude;
  }
  const double margin = s.radius + 1.0;
  const double span_x = size - 2.0 * margin - (max_dx - min_dx);
  const double span_y = size - 2.0 * margin - (max_dy - min_dy);
  if (span_x < 0.0 || span_y < 0.0) {
    throw ConfigError("sprite of radius " + std::to_string(s.radius) + " moving over " + std::to_string(frames) +
                      " frames does not fit a " + std::to_string(cfg.frame_size) + " pixel frame");
  }
  s.cx = margin - min_dx + rng.uniform() * span_x;
  s.cy = margin - min_dy + rng.uniform() * span_y;
  return s;
}

}  // namespace

std::vector<GrayImage> render_instance(const CorpusConfig& config, std::size_t cls, std::size_t frames,
                                       std::uint64_t seed) {
  if (cls >= config.classes) throw ConfigError("class " + std::to_string(cls) + " outside configured classes");
  Rng rng(seed);
  const Instance s = make_instance(config, cls, frames, rng);
  const GrayImage bg = background(config.frame_size, s.background, config.noise, rng);
  std::vector<GrayImage> out;
  out.reserve(frames);
  for (std::size_t t = 0; t < frames; ++t) out.push_back(render(s, bg, static_cast<double>(t)));
  return out;
}

Corpus generate_synthetic_corpus(const CorpusConfig& config) {
  config.validate();
  Corpus corpus;
  corpus.classes = config.classes;
  enum : std::uint64_t { kTrainStream = 1, kTestStream = 2, kVideoStream = 3 };
  auto item_seed = [&](std::uint64_t stream, std::size_t i) {
    return derive_seed(derive_seed(config.seed, stream), i);
  };
  for (std::size_t c = 0, i = 0; c < config.classes; ++c) {
    for (std::size_t n = 0; n < config.train_images_per_class; ++n, ++i) {
      corpus.train.push_back({render_instance(config, c, config.video_frames, item_seed(kTrainStream, i)).front(), c,
                              Split::train});
    }
  }
  for (std::size_t c = 0, i = 0; c < config.classes; ++c) {
    for (std::size_t n = 0; n < config.test_images_per_class; ++n, ++i) {
      corpus.test.push_back({render_instance(config, c, config.video_frames, item_seed(kTestStream, i)).front(), c,
                             Split::test});
    }
  }
  for (std::size_t v = 0; v < config.videos; ++v) {
    const std::size_t c = v % config.classes;
    corpus.videos.push_back(
        {v, render_instance(config, c, config.video_frames, item_seed(kVideoStream, v)), c});
  }
  return corpus;
}

}  // namespace md
