#include "motiondesk/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "motiondesk/error.hpp"

namespace md {

namespace {

constexpr std::pair<Variant, std::string_view> kVariantNames[] = {
    {Variant::full, "full"},
    {Variant::unreg, "unreg"},
    {Variant::unreg_motion, "unreg+motion"},
    {Variant::unreg_smooth1, "unreg+smooth1"},
    {Variant::unreg_smooth2, "unreg+smooth2"},
    {Variant::no_mra, "no_mra"},
    {Variant::only_mr, "only_mr"},
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "' as " +
                    std::string(expected));
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "a finite number");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(trim(v.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct Key {
  std::string_view name;
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Key size_key(std::string_view name, T RunConfig::*group, std::size_t T::*field) {
  return {name, [=](RunConfig& c, std::string_view k, std::string_view v) { (c.*group).*field = to_u64(k, v); },
          [=](const RunConfig& c) { return std::to_string((c.*group).*field); }};
}

template <typename T>
Key u64_key(std::string_view name, T RunConfig::*group, std::uint64_t T::*field) {
  return {name, [=](RunConfig& c, std::string_view k, std::string_view v) { (c.*group).*field = to_u64(k, v); },
          [=](const RunConfig& c) { return std::to_string((c.*group).*field); }};
}

template <typename T>
Key double_key(std::string_view name, T RunConfig::*group, double T::*field) {
  return {name, [=](RunConfig& c, std::string_view k, std::string_view v) { (c.*group).*field = to_double(k, v); },
          [=](const RunConfig& c) { return fmt_double((c.*group).*field); }};
}

Key dims_key(std::string_view name, std::size_t NetDims::*field) {
  return {name, [=](RunConfig& c, std::string_view k, std::string_view v) { c.train.dims.*field = to_u64(k, v); },
          [=](const RunConfig& c) { return std::to_string(c.train.dims.*field); }};
}

Key iterations_key(std::string_view name, std::size_t step) {
  return {name, [=](RunConfig& c, std::string_view k, std::string_view v) { c.train.iterations[step] = to_u64(k, v); },
          [=](const RunConfig& c) { return std::to_string(c.train.iterations[step]); }};
}

const std::vector<Key>& keys() {
  using C = CorpusConfig;
  using T = TrainConfig;
  static const std::vector<Key> table = {
      size_key("classes", &RunConfig::corpus, &C::classes),
      size_key("train_images_per_class", &RunConfig::corpus, &C::train_images_per_class),
      size_key("test_images_per_class", &RunConfig::corpus, &C::test_images_per_class),
      size_key("videos", &RunConfig::corpus, &C::videos),
      size_key("video_frames", &RunConfig::corpus, &C::video_frames),
      size_key("frame_size", &RunConfig::corpus, &C::frame_size),
      double_key("sprite_radius_min", &RunConfig::corpus, &C::sprite_radius_min),
      double_key("sprite_radius_max", &RunConfig::corpus, &C::sprite_radius_max),
      double_key("motion_speed", &RunConfig::corpus, &C::motion_speed),
      double_key("noise", &RunConfig::corpus, &C::noise),
      double_key("orientation_jitter", &RunConfig::corpus, &C::orientation_jitter),
      {"static_videos",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.corpus.static_videos = to_bool(k, v); },
       [](const RunConfig& c) { return std::string(c.corpus.static_videos ? "true" : "false"); }},
      u64_key("data_seed", &RunConfig::corpus, &C::seed),

      {"flow_levels",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.features.handcrafted.flow.levels = to_u64(k, v); },
       [](const RunConfig& c) { return std::to_string(c.features.handcrafted.flow.levels); }},
      {"flow_smoothness",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.features.handcrafted.flow.smoothness_weight = to_double(k, v);
       },
       [](const RunConfig& c) { return fmt_double(c.features.handcrafted.flow.smoothness_weight); }},
      {"flow_iterations",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.features.handcrafted.flow.iterations = to_u64(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.features.handcrafted.flow.iterations); }},
      {"n_clusters",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.features.handcrafted.n_clusters = to_u64(k, v); },
       [](const RunConfig& c) { return std::to_string(c.features.handcrafted.n_clusters); }},
      {"otsu_bins",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.features.handcrafted.otsu_bins = to_u64(k, v); },
       [](const RunConfig& c) { return std::to_string(c.features.handcrafted.otsu_bins); }},
      {"codebook_seed",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.features.handcrafted.codebook_seed = to_u64(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.features.handcrafted.codebook_seed); }},
      u64_key("pseudo_label_seed", &RunConfig::features, &FeatureConfig::pseudo_label_seed),

      size_key("k", &RunConfig::train, &T::k),
      size_key("interval", &RunConfig::train, &T::interval),
      size_key("delta_t", &RunConfig::train, &T::delta_t),
      size_key("motion_classes", &RunConfig::train, &T::motion_classes),
      dims_key("conv1_channels", &NetDims::conv1_channels),
      dims_key("conv2_channels", &NetDims::conv2_channels),
      dims_key("visual_dim", &NetDims::visual_dim),
      dims_key("motion_dim", &NetDims::motion_dim),
      {"margin",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.train.margin.delta = to_double(k, v); },
       [](const RunConfig& c) { return fmt_double(c.train.margin.delta); }},
      {"lambda",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.train.margin.lambda = to_double(k, v); },
       [](const RunConfig& c) { return fmt_double(c.train.margin.lambda); }},
      iterations_key("iterations_step1", 0),
      iterations_key("iterations_step2", 1),
      iterations_key("iterations_step3", 2),
      iterations_key("iterations_step4", 3),
      iterations_key("iterations_step5", 4),
      size_key("image_batch", &RunConfig::train, &T::image_batch),
      size_key("clip_batch", &RunConfig::train, &T::clip_batch),
      size_key("negatives_per_positive", &RunConfig::train, &T::negatives_per_positive),
      size_key("corrupted_per_tuple", &RunConfig::train, &T::corrupted_per_tuple),
      {"learning_rate",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.train.schedule.base_rate = to_double(k, v); },
       [](const RunConfig& c) { return fmt_double(c.train.schedule.base_rate); }},
      {"decay_factor",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.train.schedule.decay_factor = to_double(k, v); },
       [](const RunConfig& c) { return fmt_double(c.train.schedule.decay_factor); }},
      {"decay_interval",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.train.schedule.decay_interval = to_u64(k, v); },
       [](const RunConfig& c) { return std::to_string(c.train.schedule.decay_interval); }},
      {"variant",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         try {
           c.train.variant = parse_variant(v);
         } catch (const ConfigError&) {
           bad_value(k, v, "a variant name");
         }
       },
       [](const RunConfig& c) { return std::string(variant_name(c.train.variant)); }},
      u64_key("seed", &RunConfig::train, &T::seed),

      {"dataset_dir", [](RunConfig& c, std::string_view, std::string_view v) { c.dataset_dir = std::string(v); },
       [](const RunConfig& c) { return c.dataset_dir.string(); }},
      {"ablation_variants",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.ablation_variants.clear();
         for (std::string_view item : split_list(v)) {
           try {
             c.ablation_variants.push_back(parse_variant(item));
           } catch (const ConfigError&) {
             bad_value(k, item, "a variant name");
           }
         }
       },
       [](const RunConfig& c) {
         std::string out;
         for (Variant v : c.ablation_variants) out += (out.empty() ? "" : ",") + std::string(variant_name(v));
         return out;
       }},
      {"ablation_seeds",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.ablation_seeds.clear();
         for (std::string_view item : split_list(v)) c.ablation_seeds.push_back(to_u64(k, item));
       },
       [](const RunConfig& c) {
         std::string out;
         for (std::uint64_t s : c.ablation_seeds) out += (out.empty() ? "" : ",") + std::to_string(s);
         return out;
       }},
  };
  return table;
}

}  // namespace

std::string_view variant_name(Variant v) {
  for (const auto& [variant, name] : kVariantNames) {
    if (variant == v) return name;
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (const auto& [variant, n] : kVariantNames) {
    if (n == name) return variant;
  }
  std::string known;
  for (const auto& entry : kVariantNames) known += (known.empty() ? "" : ", ") + std::string(entry.second);
  throw ConfigError("unknown variant '" + std::string(name) + "' (known: " + known + ")");
}

std::vector<Variant> all_variants() {
  std::vector<Variant> out;
  for (const auto& entry : kVariantNames) out.push_back(entry.first);
  return out;
}

void CorpusConfig::validate() const {
  if (classes == 0 || classes > 6) throw ConfigError("classes must be in [1, 6], got " + std::to_string(classes));
  if (train_images_per_class == 0) throw ConfigError("train_images_per_class must be at least 1");
  if (test_images_per_class == 0) throw ConfigError("test_images_per_class must be at least 1");
  if (videos == 0) throw ConfigError("videos must be at least 1");
  if (video_frames < 2) throw ConfigError("video_frames must be at least 2");
  if (!(sprite_radius_min > 0.0) || sprite_radius_max < sprite_radius_min) {
    throw ConfigError("sprite radii must satisfy 0 < sprite_radius_min <= sprite_radius_max");
  }
  if (2.0 * sprite_radius_max + 2.0 > static_cast<double>(frame_size)) {
    throw ConfigError("sprite_radius_max " + fmt_double(sprite_radius_max) + " does not fit frame_size " +
                      std::to_string(frame_size));
  }
  if (motion_speed < 0.0) throw ConfigError("motion_speed must be non-negative");
  if (noise < 0.0 || noise > 1.0) throw ConfigError("noise must be in [0, 1]");
  if (orientation_jitter < 0.0) throw ConfigError("orientation_jitter must be non-negative");
}

void TrainConfig::validate() const {
  if (k < 4) throw ConfigError("k must be at least 4, got " + std::to_string(k));
  if (interval == 0) throw ConfigError("interval must be at least 1");
  if (delta_t == 0 || delta_t > k - 2) {
    throw ConfigError("delta_t = " + std::to_string(delta_t) + " must be in [1, k-2] = [1, " + std::to_string(k - 2) +
                      "]");
  }
  if (motion_classes == 0) throw ConfigError("motion_classes must be at least 1");
  dims.validate();
  if (dims.motion_classes != motion_classes) throw ConfigError("dims.motion_classes disagrees with motion_classes");
  margin.validate();
  schedule.validate();
  if (image_batch == 0 || clip_batch == 0) throw ConfigError("batch sizes must be positive");
}

void RunConfig::validate() const {
  corpus.validate();
  train.validate();
  if (train.dims.image_size != corpus.frame_size) {
    throw ConfigError("image_size " + std::to_string(train.dims.image_size) + " differs from frame_size " +
                      std::to_string(corpus.frame_size));
  }
  if (train.dims.classes != corpus.classes) throw ConfigError("dims.classes disagrees with classes");
  const std::size_t needed = (train.k - 1) * train.interval + 1;
  if (corpus.video_frames < needed) {
    throw ConfigError("video_frames = " + std::to_string(corpus.video_frames) + " is shorter than the " +
                      std::to_string(needed) + " frames needed for k = " + std::to_string(train.k));
  }
  if (features.handcrafted.n_clusters == 0) throw ConfigError("n_clusters must be at least 1");
  if (ablation_variants.empty()) throw ConfigError("ablation_variants must not be empty");
  if (ablation_seeds.empty()) throw ConfigError("ablation_seeds must not be empty");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto newline = text.find('\n');
    std::string_view line = text.substr(0, newline);
    text = newline == std::string_view::npos ? std::string_view{} : text.substr(newline + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value', got '" +
                        std::string(line) + "'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    bool found = false;
    for (const Key& entry : keys()) {
      if (entry.name == key) {
        entry.set(base, key, value);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
  base.train.dims.classes = base.corpus.classes;
  base.train.dims.image_size = base.corpus.frame_size;
  base.train.dims.motion_classes = base.train.motion_classes;
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::move(base));
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const Key& entry : keys()) {
    out += std::string(entry.name) + " = " + entry.get(config) + "\n";
  }
  return out;
}

}  // namespace md
