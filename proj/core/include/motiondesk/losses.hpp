#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "motiondesk/autograd.hpp"
#include "motiondesk/clip.hpp"
#include "motiondesk/nets.hpp"
#include "motiondesk/windows.hpp"

namespace md {

struct MarginConfig {
  double delta = 1.0;   // contrastive margin
  double lambda = 0.1;  // weight of the proxy loss in the joint objective

  void validate() const;
};

// Probabilities are floored here before the log in every cross-entropy.
inline constexpr double kLogFloor = 1e-12;

// [labels.size(), classes] one-hot rows.
Tensor one_hot(std::span<const std::size_t> labels, std::size_t classes);

// -sum(targets * log(max(probs, kLogFloor))); shapes must match.
Var cross_entropy(Var probs, const Tensor& targets);

// Classification loss of the visual head on labelled images.
Var l_main(Graph& g, ModelBundle& model, std::span<const GrayImage* const> images, const Tensor& labels);
// Fusion head on [motion feature, visual feature] of each image.
Var l_mra(Graph& g, ModelBundle& model, std::span<const GrayImage* const> images, const Tensor& labels);
// Motion-only head on the image motion feature.
Var l_only_mr(Graph& g, ModelBundle& model, std::span<const GrayImage* const> images, const Tensor& labels);

/// Frame range [start, start + length) inside every clip of a batch.
struct FrameSpan {
  std::size_t start = 0;
  std::size_t length = 0;
};

/// Lazily encoded frames and window motion features for a batch of clips of
/// equal length. Each frame index is encoded once for the whole batch and
/// each (start, duration) recurrence is unrolled once, so windows shared by
/// several loss terms share one subgraph.
class ClipFeatureCache {
 public:
  ClipFeatureCache(Graph& g, ModelBundle& model, std::span<const VideoClip* const> clips);
  // With frozen[i] holding clip i's precomputed frame features [length, d_v];
  // frames then enter the graph as constants and the encoder is not run.
  ClipFeatureCache(Graph& g, ModelBundle& model, std::span<const VideoClip* const> clips,
                   std::span<const Tensor* const> frozen);

  Graph& graph() { return g_; }
  ModelBundle& model() { return model_; }
  std::size_t clip_count() const { return clips_.size(); }
  std::size_t length() const { return length_; }
  const VideoClip& clip(std::size_t i) const { return *clips_[i]; }

  // Encoded frame t of every clip, [clips, d_v].
  Var frame_features(std::size_t t);
  // Motion feature of the window [start, start + duration) of every clip, [clips, d_m].
  Var window_features(std::size_t start, std::size_t duration);
  // Row i holds the motion feature of windows[i]; ClipWindow::video indexes the batch.
  Var gather(std::span<const ClipWindow> windows);

 private:
  Graph& g_;
  ModelBundle& model_;
  std::vector<const VideoClip*> clips_;
  std::vector<const Tensor*> frozen_;
  std::size_t length_ = 0;
  std::vector<Var> frames_;
  std::vector<bool> encoded_;
  std::map<std::pair<std::size_t, std::size_t>, Var> windows_;
};

// Motion classification against the clips' pseudo labels, summed over every
// clip and every span (one span = whole clip when spans is empty).
Var l_motion(ClipFeatureCache& cache, std::span<const FrameSpan> spans = {});
Var l_motion(Graph& g, ModelBundle& model, std::span<const VideoClip* const> clips);

// Contrastive first-order term over positive and negative window pairs.
Var l_smooth1(ClipFeatureCache& cache, const PairSets& pairs, double delta);
// Contrastive second-order term over neighbour and corrupted tuples.
Var l_smooth2(ClipFeatureCache& cache, const TupleSets& tuples, double delta);

struct ProxyTerms {
  Var motion, smooth1, smooth2, total;
};

ProxyTerms l_proxy(ClipFeatureCache& cache, const PairSets& pairs, const TupleSets& tuples, double delta,
                   std::span<const FrameSpan> spans = {});

// main + lambda * proxy
Var l_vre(Var main, Var proxy, double lambda);

}  // namespace md
