#include "motiondesk/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "motiondesk/error.hpp"
#include "motiondesk/losses.hpp"
#include "motiondesk/optim.hpp"
#include "motiondesk/rng.hpp"
#include "motiondesk/windows.hpp"

namespace md {

namespace {

enum : std::uint64_t { kInitStream = 100, kStepStream = 200 };

// Shuffled passes over [0, n), `batch` indices at a time.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch, Rng& rng) : order_(n), pos_(n), batch_(std::min(batch, n)), rng_(rng) {
    std::iota(order_.begin(), order_.end(), 0);
  }

  std::vector<std::size_t> next() {
    std::vector<std::size_t> out;
    out.reserve(batch_);
    while (out.size() < batch_) {
      if (pos_ == order_.size()) {
        rng_.shuffle(std::span<std::size_t>(order_));
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t pos_;
  std::size_t batch_;
  Rng& rng_;
};

enum class ProxyKind { full, motion, smooth1, smooth2 };

ProxyKind proxy_kind(Variant v) {
  switch (v) {
    case Variant::unreg_motion: return ProxyKind::motion;
    case Variant::unreg_smooth1: return ProxyKind::smooth1;
    case Variant::unreg_smooth2: return ProxyKind::smooth2;
    default: return ProxyKind::full;
  }
}

bool uses_motion_term(ProxyKind kind) { return kind == ProxyKind::full || kind == ProxyKind::motion; }

std::vector<FrameSpan> augmented_spans(std::size_t k) { return {{0, k - 2}, {1, k - 2}, {2, k - 2}}; }

Tensor image_labels(const TrainingSet& data, std::span<const std::size_t> batch, std::size_t classes) {
  std::vector<std::size_t> labels;
  for (std::size_t i : batch) labels.push_back(data.labels[i]);
  return one_hot(labels, classes);
}

std::vector<const GrayImage*> image_subset(const TrainingSet& data, std::span<const std::size_t> batch) {
  std::vector<const GrayImage*> out;
  for (std::size_t i : batch) out.push_back(data.images[i]);
  return out;
}

void check_pseudo_labels(const TrainingSet& data, std::size_t K) {
  for (const VideoClip& clip : data.clips) {
    if (!clip.pseudo_label) {
      throw ConfigError("clip " + std::to_string(clip.video_id) + " has no pseudo label; run pseudo-labelling first");
    }
    if (*clip.pseudo_label >= K) {
      throw ConfigError("clip " + std::to_string(clip.video_id) + " has pseudo label " +
                        std::to_string(*clip.pseudo_label) + " >= K = " + std::to_string(K));
    }
  }
}

// Encoder features of every frame of every clip, [k, d_v] per clip.
std::vector<Tensor> frozen_clip_features(ModelBundle& model, const TrainingSet& data) {
  std::vector<Tensor> out;
  for (const VideoClip& clip : data.clips) {
    Graph g(Trainable::none);
    std::vector<const GrayImage*> frames;
    for (const GrayImage& f : clip.frames) frames.push_back(&f);
    out.push_back(encode(g, model.theta_n, image_batch(g, frames, model.dims.image_size)).value());
  }
  return out;
}

// Per-image input of the step-5 head: [motion; visual] or motion alone.
std::vector<Tensor> frozen_image_features(ModelBundle& model, const TrainingSet& data, bool with_visual) {
  Graph g(Trainable::none);
  Var visual = encode(g, model.theta_n, image_batch(g, data.images, model.dims.image_size));
  Var motion = motion_feature_image(g, model.theta_g, visual);
  const Tensor rows = with_visual ? concat(motion, visual).value() : motion.value();
  const std::size_t width = rows.dim(1);
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < rows.dim(0); ++i) {
    std::vector<double> row(rows.data().begin() + static_cast<long>(i * width),
                            rows.data().begin() + static_cast<long>((i + 1) * width));
    out.emplace_back(Shape{width}, std::move(row));
  }
  return out;
}

Tensor stack_rows(const std::vector<Tensor>& rows, std::span<const std::size_t> batch) {
  const std::size_t width = rows.front().size();
  Tensor out({batch.size(), width});
  for (std::size_t r = 0; r < batch.size(); ++r) {
    std::copy(rows[batch[r]].data().begin(), rows[batch[r]].data().end(),
              out.data().begin() + static_cast<long>(r * width));
  }
  return out;
}

}  // namespace

TrainingSet make_training_set(std::span<const LabeledImage> train_images, std::vector<VideoClip> clips) {
  TrainingSet set;
  for (const LabeledImage& item : train_images) {
    set.images.push_back(&item.image);
    set.labels.push_back(item.label);
  }
  set.clips = std::move(clips);
  return set;
}

std::vector<std::size_t> variant_steps(Variant variant) {
  switch (variant) {
    case Variant::unreg: return {1};
    case Variant::unreg_motion:
    case Variant::unreg_smooth1:
    case Variant::unreg_smooth2:
    case Variant::no_mra: return {1, 2, 3};
    case Variant::full:
    case Variant::only_mr: return {1, 2, 3, 4, 5};
  }
  return {};
}

std::vector<ParamGroup> update_set(Variant variant, std::size_t step) {
  using P = ParamGroup;
  switch (step) {
    case 1:
    case 3: return {P::encoder, P::visual_head};
    case 2:
      if (uses_motion_term(proxy_kind(variant))) return {P::encoder, P::visual_head, P::gru, P::motion_head};
      return {P::encoder, P::visual_head, P::gru};
    case 4: return {P::gru, P::motion_head};
    case 5: return {variant == Variant::only_mr ? P::motion_only_head : P::fusion_head};
    default: throw ConfigError("training step must be in [1, 5], got " + std::to_string(step));
  }
}

std::string step_key(Variant variant, std::size_t step) {
  std::string key = std::to_string(step);
  if (step == 2) {
    constexpr const char* kNames[] = {"proxy", "motion", "smooth1", "smooth2"};
    key += std::string(":") + kNames[static_cast<int>(proxy_kind(variant))];
  }
  if (step == 5) key += variant == Variant::only_mr ? ":only_mr" : ":mra";
  return key;
}

ModelBundle initialize_model(const TrainConfig& config) {
  config.validate();
  return ModelBundle::create(config.dims, derive_seed(config.seed, kInitStream));
}

void run_step(const TrainConfig& config, const TrainingSet& data, Variant variant, std::size_t step,
              ModelBundle& model, TrainLog& log, const ProgressFn& progress) {
  config.validate();
  const std::vector<ParamGroup> groups = update_set(variant, step);
  std::vector<Parameter*> params;
  for (ParamGroup group : groups) {
    for (Parameter* p : model.params({group})) params.push_back(p);
  }
  const ProxyKind kind = proxy_kind(variant);
  const bool needs_images = step != 4;
  const bool needs_clips = step == 2 || step == 4;
  if (needs_images && data.images.empty()) throw ConfigError("training step " + std::to_string(step) + " needs labelled images");
  if (needs_clips) {
    if (data.clips.empty()) throw ConfigError("training step " + std::to_string(step) + " needs unlabelled clips");
    if (step == 4 || uses_motion_term(kind)) check_pseudo_labels(data, config.motion_classes);
    for (const VideoClip& clip : data.clips) {
      if (clip.length() != config.k) {
        throw ConfigError("clip " + std::to_string(clip.video_id) + " has " + std::to_string(clip.length()) +
                          " frames, expected k = " + std::to_string(config.k));
      }
    }
  }

  Rng rng(derive_seed(config.seed, kStepStream + step));
  BatchSampler images(data.images.size(), config.image_batch, rng);
  BatchSampler clips(data.clips.size(), config.clip_batch, rng);
  const std::vector<FrameSpan> spans = augmented_spans(config.k);

  std::vector<Tensor> frozen_clips;
  if (step == 4) frozen_clips = frozen_clip_features(model, data);
  std::vector<Tensor> frozen_images;
  if (step == 5) frozen_images = frozen_image_features(model, data, variant != Variant::only_mr);
  HeadParams& step5_head = variant == Variant::only_mr ? model.theta_o : model.theta_a;

  for (std::size_t it = 0; it < config.iterations[step - 1]; ++it) {
    Graph g{std::span<Parameter* const>(params)};
    Var loss;
    auto proxy_loss = [&](ProxyKind term_kind, bool frozen) {
      const std::vector<std::size_t> batch = clips.next();
      std::vector<const VideoClip*> batch_clips;
      std::vector<const Tensor*> batch_frozen;
      for (std::size_t i : batch) {
        batch_clips.push_back(&data.clips[i]);
        if (frozen) batch_frozen.push_back(&frozen_clips[i]);
      }
      ClipFeatureCache cache = frozen ? ClipFeatureCache(g, model, batch_clips, batch_frozen)
                                      : ClipFeatureCache(g, model, batch_clips);
      const std::vector<std::size_t> lengths(batch.size(), config.k);
      const std::uint64_t pair_seed = rng.next();
      auto pairs = [&] {
        return enumerate_windows_and_pairs(lengths, config.delta_t, config.negatives_per_positive, pair_seed);
      };
      auto tuples = [&] {
        return enumerate_tuples(lengths, config.delta_t, config.corrupted_per_tuple, derive_seed(pair_seed, 1));
      };
      switch (term_kind) {
        case ProxyKind::motion: return l_motion(cache, spans);
        case ProxyKind::smooth1: return l_smooth1(cache, pairs(), config.margin.delta);
        case ProxyKind::smooth2: return l_smooth2(cache, tuples(), config.margin.delta);
        case ProxyKind::full: break;
      }
      return l_proxy(cache, pairs(), tuples(), config.margin.delta, spans).total;
    };

    switch (step) {
      case 1:
      case 3: {
        const auto batch = images.next();
        loss = l_main(g, model, image_subset(data, batch), image_labels(data, batch, config.dims.classes));
        break;
      }
      case 2: {
        const auto batch = images.next();
        Var main = l_main(g, model, image_subset(data, batch), image_labels(data, batch, config.dims.classes));
        loss = l_vre(main, proxy_loss(kind, false), config.margin.lambda);
        break;
      }
      case 4:
        loss = proxy_loss(ProxyKind::full, true);
        break;
      case 5: {
        const auto batch = images.next();
        Var features = g.constant(stack_rows(frozen_images, batch));
        loss = cross_entropy(classify(g, step5_head, features), image_labels(data, batch, config.dims.classes));
        break;
      }
    }

    const double value = loss.value().item();
    if (!std::isfinite(value)) {
      throw NumericalError("non-finite loss " + std::to_string(value) + " at step " + std::to_string(step) +
                           ", iteration " + std::to_string(it));
    }
    g.backward(loss);
    adam_step(params, config.schedule, it);
    log.trace.push_back({step, it, value});
    if (progress) progress(log.trace.back());
  }
}

TrainResult train(const TrainConfig& config, const TrainingSet& data, const ProgressFn& progress) {
  TrainResult result{initialize_model(config), {}};
  for (std::size_t step : variant_steps(config.variant)) {
    run_step(config, data, config.variant, step, result.model, result.log, progress);
  }
  return result;
}

}  // namespace md
