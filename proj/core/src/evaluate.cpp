#include "motiondesk/evaluate.hpp"

#include <cmath>

#include "motiondesk/error.hpp"

namespace md {

namespace {
constexpr std::size_t kEvalBatch = 64;
}

std::string_view mode_name(EvalMode mode) {
  switch (mode) {
    case EvalMode::fused: return "fused";
    case EvalMode::visual_only: return "visual_only";
    case EvalMode::motion_only: return "motion_only";
  }
  return "?";
}

EvalMode parse_mode(std::string_view name) {
  for (EvalMode m : {EvalMode::fused, EvalMode::visual_only, EvalMode::motion_only}) {
    if (mode_name(m) == name) return m;
  }
  throw ConfigError("unknown evaluation mode '" + std::string(name) + "' (known: fused, visual_only, motion_only)");
}

EvalMode final_mode(Variant variant) {
  switch (variant) {
    case Variant::full: return EvalMode::fused;
    case Variant::only_mr: return EvalMode::motion_only;
    default: return EvalMode::visual_only;
  }
}

std::vector<std::size_t> predict(ModelBundle& model, std::span<const GrayImage* const> images, EvalMode mode) {
  std::vector<std::size_t> out;
  out.reserve(images.size());
  for (std::size_t begin = 0; begin < images.size(); begin += kEvalBatch) {
    const auto chunk = images.subspan(begin, std::min(kEvalBatch, images.size() - begin));
    Graph g(Trainable::none);
    Var visual = encode(g, model.theta_n, image_batch(g, chunk, model.dims.image_size));
    Var probs;
    switch (mode) {
      case EvalMode::visual_only: probs = classify(g, model.theta_c, visual); break;
      case EvalMode::fused:
        probs = classify(g, model.theta_a, concat(motion_feature_image(g, model.theta_g, visual), visual));
        break;
      case EvalMode::motion_only:
        probs = classify(g, model.theta_o, motion_feature_image(g, model.theta_g, visual));
        break;
    }
    const Tensor& p = probs.value();
    const std::size_t classes = p.dim(1);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < classes; ++c) {
        if (p[i * classes + c] > p[i * classes + best]) best = c;
      }
      out.push_back(best);
    }
  }
  return out;
}

EvalResult evaluate(ModelBundle& model, std::span<const LabeledImage> test, EvalMode mode) {
  if (test.empty()) throw Error("evaluate: empty test set");
  const std::size_t classes = model.dims.classes;
  std::vector<const GrayImage*> images;
  for (const LabeledImage& item : test) {
    if (item.label >= classes) {
      throw ShapeError("evaluate: label " + std::to_string(item.label) + " outside the model's " +
                       std::to_string(classes) + " classes");
    }
    images.push_back(&item.image);
  }
  const std::vector<std::size_t> predicted = predict(model, images, mode);
  EvalResult result;
  result.total = test.size();
  result.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < test.size(); ++i) {
    ++result.confusion[test[i].label][predicted[i]];
    result.correct += predicted[i] == test[i].label;
  }
  result.accuracy = static_cast<double>(result.correct) / static_cast<double>(result.total);
  return result;
}

std::vector<double> image_motion_feature(ModelBundle& model, const GrayImage& image) {
  Graph g(Trainable::none);
  const GrayImage* batch[] = {&image};
  Var visual = encode(g, model.theta_n, image_batch(g, batch, model.dims.image_size));
  const Tensor& f = motion_feature_image(g, model.theta_g, visual).value();
  return {f.data().begin(), f.data().end()};
}

std::vector<std::vector<double>> first_frame_motion_features(ModelBundle& model, std::span<const VideoClip> clips) {
  std::vector<std::vector<double>> out;
  out.reserve(clips.size());
  for (const VideoClip& clip : clips) {
    if (clip.frames.empty()) throw ShapeError("clip " + std::to_string(clip.video_id) + " has no frames");
    out.push_back(image_motion_feature(model, clip.frames.front()));
  }
  return out;
}

Retrieval nearest_feature(std::span<const double> query, std::span<const std::vector<double>> features,
                          std::span<const VideoClip> clips) {
  if (features.empty()) throw Error("retrieve_nearest_clip: empty clip set");
  Retrieval best{0, clips.empty() ? 0 : clips[0].video_id, INFINITY};
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (features[j].size() != query.size()) throw ShapeError("retrieve_nearest_clip: feature widths differ");
    double sq = 0.0;
    for (std::size_t d = 0; d < query.size(); ++d) {
      const double diff = query[d] - features[j][d];
      sq += diff * diff;
    }
    const double dist = std::sqrt(sq);
    if (dist < best.distance) best = {j, j < clips.size() ? clips[j].video_id : j, dist};
  }
  return best;
}

Retrieval retrieve_nearest_clip(ModelBundle& model, const GrayImage& image, std::span<const VideoClip> clips) {
  if (clips.empty()) throw Error("retrieve_nearest_clip: empty clip set");
  const std::vector<double> query = image_motion_feature(model, image);
  const auto features = first_frame_motion_features(model, clips);
  return nearest_feature(query, features, clips);
}

}  // namespace md
