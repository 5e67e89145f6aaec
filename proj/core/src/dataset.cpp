#include "motiondesk/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "motiondesk/error.hpp"

namespace fs = std::filesystem;

namespace md {

namespace {

std::string numbered(const char* pattern, std::size_t n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, n);
  return buf;
}

const char* split_name(Split s) { return s == Split::train ? "train" : "test"; }

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

void save_dataset(const fs::path& root, const Corpus& corpus) {
  make_dirs(root / "images");
  make_dirs(root / "videos");
  std::ofstream manifest(root / "manifest.tsv", std::ios::trunc);
  if (!manifest) throw IoError("cannot write " + (root / "manifest.tsv").string());
  auto write_images = [&](const std::vector<LabeledImage>& images) {
    for (std::size_t i = 0; i < images.size(); ++i) {
      const std::string rel = "images/" + std::string(split_name(images[i].split)) + numbered("_%04zu.pgm", i);
      write_pgm(root / rel, images[i].image);
      manifest << "image\t" << rel << '\t' << images[i].label << '\t' << split_name(images[i].split) << '\n';
    }
  };
  write_images(corpus.train);
  write_images(corpus.test);
  for (const SourceVideo& video : corpus.videos) {
    const std::string rel = "videos/" + numbered("%04zu", video.id);
    make_dirs(root / rel);
    for (std::size_t t = 0; t < video.frames.size(); ++t) {
      write_pgm(root / rel / numbered("frame_%04zu.pgm", t + 1), video.frames[t]);
    }
    manifest << "video\t" << rel << "\t-\tunlabeled\n";
  }
  if (!manifest) throw IoError("failed writing " + (root / "manifest.tsv").string());
}

Corpus load_dataset(const fs::path& root) {
  const fs::path manifest_path = root / "manifest.tsv";
  std::ifstream manifest(manifest_path);
  if (!manifest) throw IoError("missing dataset manifest " + manifest_path.string());
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string kind, rel, label, split;
    if (!std::getline(fields, kind, '\t') || !std::getline(fields, rel, '\t') || !std::getline(fields, label, '\t') ||
        !std::getline(fields, split)) {
      throw IoError(manifest_path.string() + ":" + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    if (kind == "image") {
      LabeledImage item;
      try {
        item.label = std::stoul(label);
      } catch (const std::exception&) {
        throw IoError(manifest_path.string() + ":" + std::to_string(line_no) + ": bad label '" + label + "'");
      }
      if (split != "train" && split != "test") {
        throw IoError(manifest_path.string() + ":" + std::to_string(line_no) + ": bad split '" + split + "'");
      }
      item.split = split == "train" ? Split::train : Split::test;
      item.image = read_pgm(root / rel);
      corpus.classes = std::max(corpus.classes, item.label + 1);
      (item.split == Split::train ? corpus.train : corpus.test).push_back(std::move(item));
    } else if (kind == "video") {
      SourceVideo video;
      video.id = corpus.videos.size();
      const fs::path dir = root / rel;
      if (!fs::is_directory(dir)) throw IoError("missing video directory " + dir.string());
      std::size_t last = 0;
      for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.size() == 14 && name.rfind("frame_", 0) == 0 && name.ends_with(".pgm") &&
            std::all_of(name.begin() + 6, name.begin() + 10, [](char c) { return c >= '0' && c <= '9'; })) {
          last = std::max<std::size_t>(last, std::stoul(name.substr(6, 4)));
        }
      }
      if (last == 0) throw IoError("video directory has no frames: " + dir.string());
      for (std::size_t t = 1; t <= last; ++t) {
        const fs::path frame = dir / numbered("frame_%04zu.pgm", t);
        if (!fs::exists(frame)) throw IoError("missing video frame " + frame.string());
        video.frames.push_back(read_pgm(frame));
      }
      corpus.videos.push_back(std::move(video));
    } else {
      throw IoError(manifest_path.string() + ":" + std::to_string(line_no) + ": unknown kind '" + kind + "'");
    }
  }
  return corpus;
}

}  // namespace md
