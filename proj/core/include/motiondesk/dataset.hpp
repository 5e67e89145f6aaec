#pragma once

#include <filesystem>

#include "motiondesk/corpus.hpp"

namespace md {

/// On-disk layout under root:
///   images/<split>_<nnnn>.pgm
///   videos/<nnnn>/frame_<nnnn>.pgm   (frames numbered from 1)
///   manifest.tsv: kind<TAB>path<TAB>label_or_-<TAB>split, one line per image and per video
/// Video labels are written as "-"; the generating class never reaches disk.
void save_dataset(const std::filesystem::path& root, const Corpus& corpus);

// Throws IoError naming the first missing or malformed path.
Corpus load_dataset(const std::filesystem::path& root);

}  // namespace md
