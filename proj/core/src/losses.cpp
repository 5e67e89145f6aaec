#include "motiondesk/losses.hpp"

#include <algorithm>
#include <cmath>

#include "motiondesk/error.hpp"

namespace md {

void MarginConfig::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("margin delta must be positive and finite");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be non-negative and finite");
}

Tensor one_hot(std::span<const std::size_t> labels, std::size_t classes) {
  if (labels.empty()) throw ShapeError("one_hot: no labels");
  Tensor out({labels.size(), classes}, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) {
      throw ShapeError("one_hot: label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(classes) + ")");
    }
    out[i * classes + labels[i]] = 1.0;
  }
  return out;
}

Var cross_entropy(Var probs, const Tensor& targets) {
  if (probs.shape() != targets.shape()) {
    throw ShapeError("cross_entropy: label width/shape " + shape_string(targets.shape()) +
                     " does not match predictions " + shape_string(probs.shape()));
  }
  Graph& g = probs.graph();
  return scale(sum(mul(log(probs, kLogFloor), g.constant(targets))), -1.0);
}

namespace {

Var zero(Graph& g) { return g.constant(Tensor::scalar(0.0)); }

void check_labels(const Tensor& labels, std::size_t images, std::size_t classes) {
  if (labels.rank() != 2 || labels.dim(0) != images || labels.dim(1) != classes) {
    throw ShapeError("labels " + shape_string(labels.shape()) + " do not match " + std::to_string(images) +
                     " images over " + std::to_string(classes) + " classes");
  }
}

Var encode_images(Graph& g, ModelBundle& model, std::span<const GrayImage* const> images) {
  return encode(g, model.theta_n, image_batch(g, images, model.dims.image_size));
}

Var pair_distances(Var a, Var b) { return distance(a, b); }

Var hinge_sum(Var distances, double delta) {
  return sum(clamp_min_zero(sub(filled_like(distances, delta), distances)));
}

}  // namespace

Var l_main(Graph& g, ModelBundle& model, std::span<const GrayImage* const> images, const Tensor& labels) {
  check_labels(labels, images.size(), model.theta_c.fc2_b.value.dim(0));
  return cross_entropy(classify(g, model.theta_c, encode_images(g, model, images)), labels);
}

Var l_mra(Graph& g, ModelBundle& model, std::span<const GrayImage* const> images, const Tensor& labels) {
  check_labels(labels, images.size(), model.theta_a.fc2_b.value.dim(0));
  Var visual = encode_images(g, model, images);
  Var motion = motion_feature_image(g, model.theta_g, visual);
  return cross_entropy(classify(g, model.theta_a, concat(motion, visual)), labels);
}

Var l_only_mr(Graph& g, ModelBundle& model, std::span<const GrayImage* const> images, const Tensor& labels) {
  check_labels(labels, images.size(), model.theta_o.fc2_b.value.dim(0));
  Var motion = motion_feature_image(g, model.theta_g, encode_images(g, model, images));
  return cross_entropy(classify(g, model.theta_o, motion), labels);
}

ClipFeatureCache::ClipFeatureCache(Graph& g, ModelBundle& model, std::span<const VideoClip* const> clips)
    : g_(g), model_(model), clips_(clips.begin(), clips.end()) {
  if (clips_.empty()) throw ShapeError("clip batch is empty");
  length_ = clips_.front()->length();
  if (length_ == 0) throw ShapeError("clip " + std::to_string(clips_.front()->video_id) + " has no frames");
  for (const VideoClip* clip : clips_) {
    if (clip->length() != length_) {
      throw ShapeError("clip batch mixes lengths " + std::to_string(length_) + " and " +
                       std::to_string(clip->length()));
    }
  }
  frames_.resize(length_);
  encoded_.assign(length_, false);
}

ClipFeatureCache::ClipFeatureCache(Graph& g, ModelBundle& model, std::span<const VideoClip* const> clips,
                                   std::span<const Tensor* const> frozen)
    : ClipFeatureCache(g, model, clips) {
  if (frozen.size() != clips_.size()) throw ShapeError("frozen features do not match the clip batch");
  const std::size_t dv = model.dims.visual_dim;
  for (const Tensor* f : frozen) {
    if (f->rank() != 2 || f->dim(0) != length_ || f->dim(1) != dv) {
      throw ShapeError("frozen frame features " + shape_string(f->shape()) + ", expected [" + std::to_string(length_) +
                       ", " + std::to_string(dv) + "]");
    }
  }
  frozen_.assign(frozen.begin(), frozen.end());
}

Var ClipFeatureCache::frame_features(std::size_t t) {
  if (t >= length_) throw ShapeError("frame " + std::to_string(t) + " outside clip of " + std::to_string(length_));
  if (!encoded_[t] && !frozen_.empty()) {
    const std::size_t dv = model_.dims.visual_dim;
    Tensor rows({clips_.size(), dv});
    for (std::size_t i = 0; i < clips_.size(); ++i) {
      std::copy_n(frozen_[i]->data().begin() + static_cast<long>(t * dv), dv,
                  rows.data().begin() + static_cast<long>(i * dv));
    }
    frames_[t] = g_.constant(std::move(rows));
    encoded_[t] = true;
  }
  if (!encoded_[t]) {
    std::vector<const GrayImage*> batch;
    batch.reserve(clips_.size());
    for (const VideoClip* clip : clips_) batch.push_back(&clip->frames[t]);
    frames_[t] = encode_images(g_, model_, batch);
    encoded_[t] = true;
  }
  return frames_[t];
}

Var ClipFeatureCache::window_features(std::size_t start, std::size_t duration) {
  if (duration == 0 || start + duration > length_) {
    throw ShapeError("window [" + std::to_string(start) + ", " + std::to_string(start + duration) +
                     ") does not fit clip of " + std::to_string(length_));
  }
  const auto key = std::make_pair(start, duration);
  if (auto it = windows_.find(key); it != windows_.end()) return it->second;
  std::vector<Var> features;
  for (std::size_t t = start; t < start + duration; ++t) features.push_back(frame_features(t));
  Var motion = motion_feature_video(g_, model_.theta_g, features);
  windows_.emplace(key, motion);
  return motion;
}

Var ClipFeatureCache::gather(std::span<const ClipWindow> windows) {
  if (windows.empty()) throw ShapeError("gather: no windows");
  // Group rows by (start, duration); each group becomes a one-hot selection
  // matrix applied to that window's batch features.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].video >= clips_.size()) {
      throw ShapeError("window refers to clip " + std::to_string(windows[i].video) + " of a batch of " +
                       std::to_string(clips_.size()));
    }
    groups[{windows[i].start, windows[i].duration}].push_back(i);
  }
  Var out;
  for (const auto& [key, rows] : groups) {
    Tensor select({windows.size(), clips_.size()}, 0.0);
    for (std::size_t i : rows) select[i * clips_.size() + windows[i].video] = 1.0;
    Var part = matmul(g_.constant(std::move(select)), window_features(key.first, key.second));
    out = out.valid() ? add(out, part) : part;
  }
  return out;
}

Var l_motion(ClipFeatureCache& cache, std::span<const FrameSpan> spans) {
  Graph& g = cache.graph();
  ModelBundle& model = cache.model();
  const std::size_t K = model.theta_m.fc2_b.value.dim(0);
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < cache.clip_count(); ++i) {
    const VideoClip& clip = cache.clip(i);
    if (!clip.pseudo_label) throw Error("l_motion: clip " + std::to_string(clip.video_id) + " has no pseudo label");
    if (*clip.pseudo_label >= K) {
      throw Error("l_motion: clip " + std::to_string(clip.video_id) + " has pseudo label " +
                  std::to_string(*clip.pseudo_label) + " outside [0, " + std::to_string(K) + ")");
    }
    labels.push_back(*clip.pseudo_label);
  }
  const Tensor targets = one_hot(labels, K);
  const FrameSpan whole{0, cache.length()};
  if (spans.empty()) spans = std::span<const FrameSpan>(&whole, 1);
  Var total;
  for (const FrameSpan& span : spans) {
    Var term = cross_entropy(classify(g, model.theta_m, cache.window_features(span.start, span.length)), targets);
    total = total.valid() ? add(total, term) : term;
  }
  return total;
}

Var l_motion(Graph& g, ModelBundle& model, std::span<const VideoClip* const> clips) {
  ClipFeatureCache cache(g, model, clips);
  return l_motion(cache);
}

Var l_smooth1(ClipFeatureCache& cache, const PairSets& pairs, double delta) {
  Graph& g = cache.graph();
  Var total = zero(g);
  auto side = [](std::span<const WindowPair> set, bool first) {
    std::vector<ClipWindow> out;
    for (const WindowPair& p : set) out.push_back(first ? p.first : p.second);
    return out;
  };
  if (!pairs.positives.empty()) {
    total = add(total, sum(pair_distances(cache.gather(side(pairs.positives, true)),
                                          cache.gather(side(pairs.positives, false)))));
  }
  if (!pairs.negatives.empty()) {
    total = add(total, hinge_sum(pair_distances(cache.gather(side(pairs.negatives, true)),
                                                cache.gather(side(pairs.negatives, false))),
                                 delta));
  }
  return total;
}

Var l_smooth2(ClipFeatureCache& cache, const TupleSets& tuples, double delta) {
  Graph& g = cache.graph();
  Var total = zero(g);
  auto second_difference = [&](std::span<const WindowTuple> set) {
    std::vector<ClipWindow> w1, w2, w3;
    for (const WindowTuple& t : set) {
      w1.push_back(t.first);
      w2.push_back(t.second);
      w3.push_back(t.third);
    }
    Var f2 = cache.gather(w2);
    return pair_distances(sub(cache.gather(w1), f2), sub(f2, cache.gather(w3)));
  };
  if (!tuples.neighbors.empty()) total = add(total, sum(second_difference(tuples.neighbors)));
  if (!tuples.corrupted.empty()) total = add(total, hinge_sum(second_difference(tuples.corrupted), delta));
  return total;
}

ProxyTerms l_proxy(ClipFeatureCache& cache, const PairSets& pairs, const TupleSets& tuples, double delta,
                   std::span<const FrameSpan> spans) {
  ProxyTerms terms;
  terms.motion = l_motion(cache, spans);
  terms.smooth1 = l_smooth1(cache, pairs, delta);
  terms.smooth2 = l_smooth2(cache, tuples, delta);
  terms.total = add(add(terms.motion, terms.smooth1), terms.smooth2);
  return terms;
}

Var l_vre(Var main, Var proxy, double lambda) { return add(main, scale(proxy, lambda)); }

}  // namespace md
