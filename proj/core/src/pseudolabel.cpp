#include "motiondesk/pseudolabel.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "motiondesk/error.hpp"
#include "motiondesk/kmeans.hpp"

namespace md {

namespace {
PseudoLabeledClip make_label(std::size_t clip_id, std::size_t label, std::size_t K) {
  PseudoLabeledClip out{clip_id, label, std::vector<double>(K, 0.0)};
  out.label_onehot[label] = 1.0;
  return out;
}
}  // namespace

std::vector<PseudoLabeledClip> assign_pseudo_labels(std::span<const std::vector<double>> embeddings, std::size_t K,
                                                    std::uint64_t seed) {
  if (K == 0) throw ConfigError("assign_pseudo_labels: K must be at least 1");
  if (embeddings.size() < K) {
    throw ConfigError("assign_pseudo_labels: " + std::to_string(embeddings.size()) + " clips cannot fill K = " +
                      std::to_string(K) + " clusters; use a smaller K");
  }
  const std::size_t dim = embeddings.front().size();
  if (dim == 0) throw ShapeError("assign_pseudo_labels: empty embeddings");
  std::vector<double> points;
  points.reserve(embeddings.size() * dim);
  for (const auto& row : embeddings) {
    if (row.size() != dim) throw ShapeError("assign_pseudo_labels: embeddings differ in width");
    points.insert(points.end(), row.begin(), row.end());
  }
  const KMeansResult km = kmeans(points, dim, K, seed);
  std::vector<PseudoLabeledClip> labels;
  labels.reserve(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i) labels.push_back(make_label(i, km.assignments[i], K));
  return labels;
}

void save_pseudo_labels(const std::filesystem::path& path, std::span<const PseudoLabeledClip> labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write pseudo-label manifest " + path.string());
  for (const PseudoLabeledClip& l : labels) out << l.clip_id << '\t' << l.label << '\n';
}

std::vector<PseudoLabeledClip> load_pseudo_labels(const std::filesystem::path& path, std::size_t K) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read pseudo-label manifest " + path.string());
  std::vector<PseudoLabeledClip> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t clip_id = 0, label = 0;
    if (!(fields >> clip_id >> label)) throw IoError("pseudo-label manifest: malformed line '" + line + "'");
    if (label >= K) throw IoError("pseudo-label manifest: label " + std::to_string(label) + " outside [0, K)");
    labels.push_back(make_label(clip_id, label, K));
  }
  return labels;
}

}  // namespace md
