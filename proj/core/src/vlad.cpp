#include "motiondesk/vlad.hpp"

#include <algorithm>
#include <cmath>

#include "motiondesk/error.hpp"
#include "motiondesk/kmeans.hpp"
#include "motiondesk/otsu.hpp"

namespace md {

std::vector<FlowVector> surviving_entries(std::span<const FlowField> flows, double threshold) {
  std::vector<FlowVector> out;
  for (const FlowField& flow : flows) {
    for (const FlowVector& e : flow.entries) {
      if (std::hypot(e.dx, e.dy) >= threshold) out.push_back(e);
    }
  }
  return out;
}

FlowCodebook build_flow_codebook(std::span<const FlowField> flows, double threshold, std::size_t n_clusters,
                                 std::uint64_t seed) {
  const std::vector<FlowVector> survivors = surviving_entries(flows, threshold);
  if (survivors.size() < n_clusters) {
    throw ConfigError("build_flow_codebook: only " + std::to_string(survivors.size()) +
                      " flow entries survive filtering, fewer than n_clusters = " + std::to_string(n_clusters) +
                      "; lower n_clusters");
  }
  std::vector<double> points;
  points.reserve(survivors.size() * 2);
  for (const FlowVector& e : survivors) {
    points.push_back(e.dx);
    points.push_back(e.dy);
  }
  const KMeansResult km = kmeans(points, 2, n_clusters, seed);
  FlowCodebook codebook;
  codebook.seed = seed;
  for (std::size_t c = 0; c < n_clusters; ++c) {
    const FlowVector centroid{km.centroids[2 * c], km.centroids[2 * c + 1]};
    if (!std::isfinite(centroid.dx) || !std::isfinite(centroid.dy)) {
      throw NumericalError("build_flow_codebook: non-finite centroid");
    }
    for (const FlowVector& other : codebook.centroids) {
      if (other == centroid) {
        throw Error("build_flow_codebook: degenerate corpus, surviving flow entries do not support " +
                    std::to_string(n_clusters) + " distinct centroids");
      }
    }
    codebook.centroids.push_back(centroid);
  }
  return codebook;
}

VladEmbedding vlad_from_entries(std::span<const FlowVector> survivors, const FlowCodebook& codebook) {
  const std::size_t k = codebook.size();
  std::vector<double> flat(2 * k);
  for (std::size_t c = 0; c < k; ++c) {
    flat[2 * c] = codebook.centroids[c].dx;
    flat[2 * c + 1] = codebook.centroids[c].dy;
  }
  VladEmbedding out;
  out.values.assign(2 * k, 0.0);
  for (const FlowVector& e : survivors) {
    const double point[2] = {e.dx, e.dy};
    const std::size_t c = nearest_centroid(point, flat, k);
    out.values[2 * c] += e.dx - flat[2 * c];
    out.values[2 * c + 1] += e.dy - flat[2 * c + 1];
  }
  double norm2 = 0.0;
  for (double& v : out.values) {
    v = std::copysign(std::sqrt(std::abs(v)), v);
    norm2 += v * v;
  }
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : out.values) v *= inv;
  }
  return out;
}

VladEmbedding vlad_encode(const FlowField& flow, double threshold, const FlowCodebook& codebook) {
  return vlad_from_entries(surviving_entries(std::span<const FlowField>(&flow, 1), threshold), codebook);
}

ClipEmbedding embed_flows(std::span<const FlowField> flows, double threshold, const FlowCodebook& codebook) {
  ClipEmbedding out;
  out.values.reserve(flows.size() * codebook.vlad_dim());
  for (const FlowField& flow : flows) {
    const VladEmbedding e = vlad_encode(flow, threshold, codebook);
    out.values.insert(out.values.end(), e.values.begin(), e.values.end());
  }
  return out;
}

namespace {
std::vector<FlowField> clip_flows(const VideoClip& clip, const FlowSettings& settings) {
  if (clip.length() < 2) {
    throw ConfigError("clip " + std::to_string(clip.video_id) + " has " + std::to_string(clip.length()) +
                      " frame(s); flow needs at least 2");
  }
  std::vector<FlowField> flows;
  flows.reserve(clip.length() - 1);
  for (std::size_t t = 0; t + 1 < clip.length(); ++t) {
    flows.push_back(compute_flow(clip.frames[t], clip.frames[t + 1], settings));
  }
  return flows;
}
}  // namespace

ClipEmbedding clip_embedding(const VideoClip& clip, double threshold, const FlowCodebook& codebook,
                             const FlowSettings& settings) {
  const std::vector<FlowField> flows = clip_flows(clip, settings);
  return embed_flows(flows, threshold, codebook);
}

HandcraftedFeatures extract_handcrafted_features(std::span<const VideoClip> clips, const HandcraftedSettings& settings) {
  if (clips.empty()) throw ConfigError("extract_handcrafted_features: no clips");
  const std::size_t maps_per_clip = clips.front().length() - 1;
  std::vector<std::vector<FlowField>> per_clip;
  per_clip.reserve(clips.size());
  std::vector<FlowField> all_flows;
  for (const VideoClip& clip : clips) {
    if (clip.length() != clips.front().length()) {
      throw ConfigError("extract_handcrafted_features: clips must share one frame count");
    }
    per_clip.push_back(clip_flows(clip, settings.flow));
    all_flows.insert(all_flows.end(), per_clip.back().begin(), per_clip.back().end());
  }

  std::vector<double> magnitudes;
  for (const FlowField& flow : all_flows) {
    const std::vector<double> m = flow.magnitudes();
    magnitudes.insert(magnitudes.end(), m.begin(), m.end());
  }

  HandcraftedFeatures out;
  out.threshold = otsu_threshold(magnitudes, settings.otsu_bins);

  const std::vector<FlowVector> survivors = surviving_entries(all_flows, out.threshold);
  const bool identical = std::all_of(survivors.begin(), survivors.end(),
                                     [&](const FlowVector& e) { return e == survivors.front(); });
  if (survivors.empty() || identical) {
    out.degenerate = true;
    out.warnings.push_back(
        "degenerate corpus: every surviving optical-flow entry is identical (static videos?); "
        "clip embeddings are all-zero");
    const std::size_t dim = maps_per_clip * 2 * settings.n_clusters;
    for (std::size_t i = 0; i < clips.size(); ++i) out.embeddings.push_back({std::vector<double>(dim, 0.0)});
    return out;
  }

  out.codebook = build_flow_codebook(all_flows, out.threshold, settings.n_clusters, settings.codebook_seed);
  for (const std::vector<FlowField>& flows : per_clip) {
    out.embeddings.push_back(embed_flows(flows, out.threshold, out.codebook));
  }
  return out;
}

}  // namespace md
