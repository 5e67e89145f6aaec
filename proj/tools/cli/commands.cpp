#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "motiondesk/checkpoint.hpp"
#include "motiondesk/corpus.hpp"
#include "motiondesk/dataset.hpp"
#include "motiondesk/embedding_cache.hpp"
#include "motiondesk/error.hpp"
#include "motiondesk/evaluate.hpp"
#include "motiondesk/pseudolabel.hpp"
#include "motiondesk/train.hpp"
#include "motiondesk/vlad.hpp"

namespace mdesk {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  if (ec || (!dir.empty() && !fs::is_directory(dir))) throw md::IoError("cannot create directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw md::IoError("cannot write " + path.string());
  out << text;
  if (!out) throw md::IoError("write failed: " + path.string());
}

void require(const fs::path& path) {
  if (!fs::exists(path)) throw md::IoError("missing input: " + path.string());
}

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

// Provenance record written next to a command's outputs.
class RunManifest {
 public:
  RunManifest(std::string command, const md::RunConfig& config, std::vector<std::uint64_t> seeds)
      : command_(std::move(command)), config_(md::format_config(config)), seeds_(std::move(seeds)), started_(utc_now()) {}

  void add(const fs::path& artifact) { artifacts_.push_back(artifact.string()); }

  void write(const fs::path& dir) const {
    for (const std::string& a : artifacts_) {
      if (!fs::exists(a)) throw md::IoError("artifact was not written: " + a);
    }
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["config"] = config_;
    j["seeds"] = seeds_;
    j["artifacts"] = artifacts_;
    j["started"] = started_;
    j["finished"] = utc_now();
    write_text(dir / ("run_" + command_ + ".json"), j.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::string config_;
  std::vector<std::uint64_t> seeds_;
  std::vector<std::string> artifacts_;
  std::string started_;
};

fs::path data_dir(const Options& opts, const md::RunConfig& config) {
  return opts.data.empty() ? config.dataset_dir : opts.data;
}

fs::path out_dir(const Options& opts) { return opts.out.empty() ? fs::path("artifacts") : opts.out; }

fs::path or_default(const fs::path& given, const fs::path& fallback) { return given.empty() ? fallback : given; }

md::Corpus load_corpus(const fs::path& dir) {
  require(dir / "manifest.tsv");
  return md::load_dataset(dir);
}

bool needs_pseudo_labels(md::Variant v) {
  return v != md::Variant::unreg && v != md::Variant::unreg_smooth1 && v != md::Variant::unreg_smooth2;
}

// Clips of the corpus videos, labelled from `labels` when that file exists.
std::vector<md::VideoClip> labelled_clips(const md::RunConfig& config, const md::Corpus& corpus,
                                          const fs::path& labels, bool required) {
  std::vector<md::VideoClip> clips = md::sample_clips(corpus.videos, config.train.k, config.train.interval);
  if (!fs::exists(labels)) {
    if (required) throw md::IoError("missing input: " + labels.string() + " (run pseudo-label first)");
    return clips;
  }
  const auto assigned = md::load_pseudo_labels(labels, config.train.motion_classes);
  if (assigned.size() != clips.size()) {
    throw md::ConfigError(labels.string() + " has " + std::to_string(assigned.size()) + " labels for " +
                          std::to_string(clips.size()) + " clips");
  }
  for (const md::PseudoLabeledClip& p : assigned) {
    if (p.clip_id >= clips.size()) throw md::ConfigError(labels.string() + ": clip id " + std::to_string(p.clip_id) + " out of range");
    clips[p.clip_id].pseudo_label = p.label;
  }
  return clips;
}

md::ModelBundle load_model(const md::RunConfig& config, const fs::path& path) {
  require(path);
  md::ModelBundle model = md::ModelBundle::create(config.train.dims, 0);
  std::vector<md::Parameter*> params = model.all_params();
  md::restore_parameters(md::load_checkpoint(path), params);
  return model;
}

void save_model(const fs::path& path, const md::ModelBundle& model) {
  ensure_dir(path.parent_path());
  const std::vector<const md::Parameter*> params = model.all_params();
  md::save_checkpoint(path, params);
}

std::string trace_csv(const std::string& variant, std::uint64_t seed, const md::TrainLog& log) {
  std::string out;
  for (const md::LossRecord& r : log.trace) {
    out += variant + ',' + std::to_string(seed) + ',' + std::to_string(r.step) + ',' + std::to_string(r.iteration) +
           ',' + fmt(r.loss) + '\n';
  }
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

md::RunConfig resolve_config(const Options& opts, const std::string& command) {
  md::RunConfig config = opts.config ? md::load_config(*opts.config) : md::RunConfig{};
  if (opts.seed) {
    if (command == "gen-data") {
      config.corpus.seed = *opts.seed;
    } else if (command == "ablate") {
      config.ablation_seeds = {*opts.seed};
    } else {
      config.train.seed = *opts.seed;
    }
  }
  if (opts.variant) {
    if (command == "ablate") {
      config.ablation_variants.clear();
      for (const std::string& name : split_list(*opts.variant)) config.ablation_variants.push_back(md::parse_variant(name));
    } else {
      config.train.variant = md::parse_variant(*opts.variant);
    }
  }
  config.validate();
  return config;
}

std::size_t worker_threads() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MD_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || cap == 0) throw md::ConfigError("MD_THREADS must be a positive integer, got '" + std::string(env) + "'");
    n = std::min<std::size_t>(n, cap);
  }
  return n;
}

int cmd_gen_data(const Options& opts) {
  const md::RunConfig config = resolve_config(opts, "gen-data");
  const fs::path out = opts.out.empty() ? config.dataset_dir : opts.out;
  ensure_dir(out);
  RunManifest manifest("gen-data", config, {config.corpus.seed});
  const md::Corpus corpus = md::generate_synthetic_corpus(config.corpus);
  md::save_dataset(out, corpus);
  manifest.add(out / "manifest.tsv");
  std::cout << "wrote " << corpus.train.size() + corpus.test.size() << " images and " << corpus.videos.size()
            << " videos to " << out.string() << '\n';
  manifest.write(out);
  return 0;
}

int cmd_features(const Options& opts) {
  const md::RunConfig config = resolve_config(opts, "features");
  const fs::path out = out_dir(opts);
  const fs::path cache = or_default(opts.cache, out / "embeddings.mdemb");
  const md::Corpus corpus = load_corpus(data_dir(opts, config));
  RunManifest manifest("features", config, {config.features.handcrafted.codebook_seed});

  const auto clips = md::sample_clips(corpus.videos, config.train.k, config.train.interval);
  const md::HandcraftedFeatures features = md::extract_handcrafted_features(clips, config.features.handcrafted);
  for (const std::string& w : features.warnings) warn(w);

  md::EmbeddingTable table;
  table.dim = features.dim();
  for (const md::ClipEmbedding& e : features.embeddings) table.rows.push_back(e.values);
  ensure_dir(cache.parent_path());
  md::save_embeddings(cache, table);

  fs::path sidecar = cache;
  sidecar += ".meta";
  std::string meta;
  meta += "otsu_threshold = " + fmt(features.threshold) + "\n";
  meta += "codebook_seed = " + std::to_string(config.features.handcrafted.codebook_seed) + "\n";
  meta += "n_clusters = " + std::to_string(config.features.handcrafted.n_clusters) + "\n";
  meta += "clips = " + std::to_string(table.rows.size()) + "\n";
  meta += "dim = " + std::to_string(table.dim) + "\n";
  meta += "degenerate = " + std::string(features.degenerate ? "1" : "0") + "\n";
  write_text(sidecar, meta);
  manifest.add(cache);
  manifest.add(sidecar);
  std::cout << "embedded " << table.rows.size() << " clips, dim " << table.dim << ", otsu threshold "
            << fmt(features.threshold) << '\n';
  manifest.write(cache.parent_path().empty() ? fs::path(".") : cache.parent_path());
  return 0;
}

int cmd_pseudo_label(const Options& opts) {
  const md::RunConfig config = resolve_config(opts, "pseudo-label");
  const fs::path out = out_dir(opts);
  const fs::path cache = or_default(opts.cache, out / "embeddings.mdemb");
  const fs::path labels = or_default(opts.labels, out / "pseudo_labels.tsv");
  require(cache);
  const md::EmbeddingTable table = md::load_embeddings(cache);
  const auto assigned = md::assign_pseudo_labels(table.rows, config.train.motion_classes, config.features.pseudo_label_seed);
  ensure_dir(labels.parent_path());
  md::save_pseudo_labels(labels, assigned);

  std::vector<std::size_t> counts(config.train.motion_classes, 0);
  for (const auto& p : assigned) ++counts[p.label];
  const auto populated = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  if (populated < static_cast<long>(counts.size())) {
    warn(std::to_string(populated) + " of " + std::to_string(counts.size()) + " pseudo-label clusters are populated");
  }
  RunManifest manifest("pseudo-label", config, {config.features.pseudo_label_seed});
  manifest.add(labels);
  std::cout << "labelled " << assigned.size() << " clips into " << populated << " clusters\n";
  manifest.write(labels.parent_path().empty() ? fs::path(".") : labels.parent_path());
  return 0;
}

int cmd_train(const Options& opts) {
  const md::RunConfig config = resolve_config(opts, "train");
  const fs::path out = out_dir(opts);
  const fs::path labels = or_default(opts.labels, out / "pseudo_labels.tsv");
  const md::Corpus corpus = load_corpus(data_dir(opts, config));
  const md::Variant variant = config.train.variant;
  md::TrainingSet data =
      md::make_training_set(corpus.train, labelled_clips(config, corpus, labels, needs_pseudo_labels(variant)));
  ensure_dir(out);
  RunManifest manifest("train", config, {config.train.seed});

  const md::ProgressFn progress = [](const md::LossRecord& r) {
    if (r.iteration % 100 == 0) std::cerr << "step " << r.step << " iteration " << r.iteration << " loss " << r.loss << '\n';
  };
  md::TrainResult result = md::train(config.train, data, progress);
  for (const std::string& w : result.log.warnings) warn(w);

  const std::string name(md::variant_name(variant));
  save_model(out / "model.ckpt", result.model);
  write_text(out / "metrics.csv", "variant,seed,step,iteration,loss\n" + trace_csv(name, config.train.seed, result.log));
  std::vector<double> losses;
  for (const md::LossRecord& r : result.log.trace) losses.push_back(r.loss);
  write_text(out / "loss.svg", line_chart_svg(losses, "training loss, " + name));
  for (const char* f : {"model.ckpt", "metrics.csv", "loss.svg"}) manifest.add(out / f);

  const md::EvalMode mode = md::final_mode(variant);
  const md::EvalResult eval = md::evaluate(result.model, corpus.test, mode);
  std::cout << name << " seed " << config.train.seed << ": " << md::mode_name(mode) << " accuracy " << eval.accuracy
            << " (" << eval.correct << "/" << eval.total << ")\n";
  manifest.write(out);
  return 0;
}

int cmd_eval(const Options& opts) {
  const md::RunConfig config = resolve_config(opts, "eval");
  const fs::path out = out_dir(opts);
  const md::Corpus corpus = load_corpus(data_dir(opts, config));
  md::ModelBundle model = load_model(config, or_default(opts.checkpoint, out / "model.ckpt"));
  std::vector<md::EvalMode> modes;
  for (const std::string& m : opts.modes) modes.push_back(md::parse_mode(m));
  if (modes.empty()) modes = {md::EvalMode::fused, md::EvalMode::visual_only, md::EvalMode::motion_only};

  std::string csv = "mode,accuracy,correct,total\n";
  for (md::EvalMode mode : modes) {
    const md::EvalResult r = md::evaluate(model, corpus.test, mode);
    csv += std::string(md::mode_name(mode)) + ',' + fmt(r.accuracy) + ',' + std::to_string(r.correct) + ',' +
           std::to_string(r.total) + '\n';
    std::cout << md::mode_name(mode) << " accuracy " << r.accuracy << " (" << r.correct << "/" << r.total << ")\n";
  }
  RunManifest manifest("eval", config, {config.train.seed});
  write_text(out / "eval.csv", csv);
  manifest.add(out / "eval.csv");
  manifest.write(out);
  return 0;
}

int cmd_retrieve(const Options& opts) {
  const md::RunConfig config = resolve_config(opts, "retrieve");
  const fs::path out = out_dir(opts);
  const md::Corpus corpus = load_corpus(data_dir(opts, config));
  md::ModelBundle model = load_model(config, or_default(opts.checkpoint, out / "model.ckpt"));
  const auto clips = md::sample_clips(corpus.videos, config.train.k, config.train.interval);
  if (clips.empty()) throw md::ConfigError("retrieve: the dataset has no videos");
  const auto features = md::first_frame_motion_features(model, clips);

  std::string report = "query_image\tclip_id\tdistance\n";
  for (std::size_t i = 0; i < corpus.test.size(); ++i) {
    const auto query = md::image_motion_feature(model, corpus.test[i].image);
    const md::Retrieval hit = md::nearest_feature(query, features, clips);
    char name[32];
    std::snprintf(name, sizeof name, "images/test_%04zu.pgm", i);
    report += std::string(name) + '\t' + std::to_string(hit.clip_id) + '\t' + fmt(hit.distance) + '\n';
  }
  RunManifest manifest("retrieve", config, {config.train.seed});
  write_text(out / "retrieval.tsv", report);
  manifest.add(out / "retrieval.tsv");
  std::cout << "retrieved nearest clips for " << corpus.test.size() << " test images\n";
  manifest.write(out);
  return 0;
}

int cmd_ablate(const Options& opts) {
  const md::RunConfig config = resolve_config(opts, "ablate");
  const fs::path out = out_dir(opts);
  const fs::path labels = or_default(opts.labels, out / "pseudo_labels.tsv");
  const md::Corpus corpus = load_corpus(data_dir(opts, config));
  const bool need_labels = std::any_of(config.ablation_variants.begin(), config.ablation_variants.end(), needs_pseudo_labels);
  md::TrainingSet data = md::make_training_set(corpus.train, labelled_clips(config, corpus, labels, need_labels));
  ensure_dir(out);
  RunManifest manifest("ablate", config, config.ablation_seeds);

  const std::size_t threads = worker_threads();
  std::cerr << "ablating " << config.ablation_variants.size() << " variants x " << config.ablation_seeds.size()
            << " seeds on " << threads << " thread(s)\n";
  const std::vector<md::AblationCell> cells =
      md::run_ablation(config.train, data, corpus.test, config.ablation_variants, config.ablation_seeds, threads);

  for (const md::AblationCell& cell : cells) {
    for (const std::string& w : cell.log.warnings) warn(w);
    const fs::path path = out / "cells" / std::string(md::variant_name(cell.variant)) /
                          ("seed_" + std::to_string(cell.seed)) / "model.ckpt";
    save_model(path, cell.model);
    manifest.add(path);
  }
  write_text(out / "results.csv", results_csv(cells));
  write_text(out / "metrics.csv", metrics_csv(cells));

  std::vector<std::pair<std::string, double>> bars;
  for (md::Variant v : config.ablation_variants) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const md::AblationCell& cell : cells) {
      if (cell.variant != v) continue;
      sum += cell.accuracies.front().accuracy;
      ++n;
    }
    bars.emplace_back(std::string(md::variant_name(v)), n ? sum / static_cast<double>(n) : 0.0);
    std::cout << md::variant_name(v) << " mean accuracy " << bars.back().second << '\n';
  }
  write_text(out / "ablation.svg", bar_chart_svg(bars, "mean test accuracy per variant"));
  for (const char* f : {"results.csv", "metrics.csv", "ablation.svg"}) manifest.add(out / f);
  manifest.write(out);
  return 0;
}

std::string results_csv(const std::vector<md::AblationCell>& cells) {
  std::string out = "variant,seed,mode,accuracy\n";
  for (const md::AblationCell& cell : cells) {
    for (const md::AccuracyRow& row : cell.accuracies) {
      out += std::string(md::variant_name(cell.variant)) + ',' + std::to_string(cell.seed) + ',' +
             std::string(md::mode_name(row.mode)) + ',' + fmt(row.accuracy) + '\n';
    }
  }
  return out;
}

std::string metrics_csv(const std::vector<md::AblationCell>& cells) {
  std::string out = "variant,seed,step,iteration,loss\n";
  for (const md::AblationCell& cell : cells) out += trace_csv(std::string(md::variant_name(cell.variant)), cell.seed, cell.log);
  return out;
}

std::string bar_chart_svg(const std::vector<std::pair<std::string, double>>& bars, const std::string& title) {
  const int bar_w = 60, gap = 20, height = 200, top = 40, left = 40;
  const int width = left + static_cast<int>(bars.size()) * (bar_w + gap) + gap;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height + top + 60
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "  <text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  svg << "  <line x1=\"" << left << "\" y1=\"" << top + height << "\" x2=\"" << width << "\" y2=\"" << top + height
      << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double v = std::clamp(bars[i].second, 0.0, 1.0);
    const int h = static_cast<int>(v * height + 0.5);
    const int x = left + gap + static_cast<int>(i) * (bar_w + gap);
    svg << "  <rect x=\"" << x << "\" y=\"" << top + height - h << "\" width=\"" << bar_w << "\" height=\"" << h
        << "\" fill=\"#4a7ab5\"/>\n";
    char label[16];
    std::snprintf(label, sizeof label, "%.3f", bars[i].second);
    svg << "  <text x=\"" << x + bar_w / 2 << "\" y=\"" << top + height - h - 4 << "\" text-anchor=\"middle\">"
        << label << "</text>\n";
    svg << "  <text x=\"" << x + bar_w / 2 << "\" y=\"" << top + height + 16 << "\" text-anchor=\"middle\">"
        << xml_escape(bars[i].first) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string line_chart_svg(const std::vector<double>& values, const std::string& title) {
  const int width = 600, height = 240, left = 50, top = 30;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width + left + 20 << "\" height=\"" << height + top + 30
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "  <text x=\"" << left << "\" y=\"18\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  if (!values.empty()) {
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it > *lo_it ? *hi_it : *lo_it + 1.0;
    svg << "  <polyline fill=\"none\" stroke=\"#b5484a\" points=\"";
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double x = left + (values.size() > 1 ? width * static_cast<double>(i) / (values.size() - 1) : 0.0);
      const double y = top + height * (hi - values[i]) / (hi - lo);
      char pt[48];
      std::snprintf(pt, sizeof pt, "%.1f,%.1f ", x, y);
      svg << pt;
    }
    svg << "\"/>\n";
    char range[64];
    std::snprintf(range, sizeof range, "%.3g", hi);
    svg << "  <text x=\"4\" y=\"" << top + 4 << "\">" << range << "</text>\n";
    std::snprintf(range, sizeof range, "%.3g", lo);
    svg << "  <text x=\"4\" y=\"" << top + height << "\">" << range << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

int run(int argc, char** argv) {
  CLI::App app{"mdesk: motion-regularised few-label image classification at desk scale"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opts;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string variant;
  auto* config_opt = app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "seed override (data seed for gen-data, seed list for ablate)");
  auto* variant_opt = app.add_option("--variant", variant, "variant name (comma list for ablate)");
  app.add_option("--out", opts.out, "output directory");

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const Options&);
  };
  const Command commands[] = {
      {"gen-data", "write the synthetic corpus", cmd_gen_data},
      {"features", "hand-crafted clip embeddings (MDEMB cache)", cmd_features},
      {"pseudo-label", "cluster clip embeddings into pseudo motion labels", cmd_pseudo_label},
      {"train", "run the training steps of one variant", cmd_train},
      {"eval", "test accuracy of a checkpoint", cmd_eval},
      {"retrieve", "nearest motion clip for every test image", cmd_retrieve},
      {"ablate", "variant x seed grid", cmd_ablate},
  };
  std::map<CLI::App*, int (*)(const Options&)> dispatch;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    const std::string name = c.name;
    if (name != "gen-data" && name != "pseudo-label") sub->add_option("--data", opts.data, "dataset directory");
    if (name == "features" || name == "pseudo-label") sub->add_option("--cache", opts.cache, "embedding cache path");
    if (name == "pseudo-label" || name == "train" || name == "ablate") sub->add_option("--labels", opts.labels, "pseudo-label manifest");
    if (name == "eval" || name == "retrieve") sub->add_option("--checkpoint", opts.checkpoint, "model checkpoint");
    if (name == "eval") sub->add_option("--mode", opts.modes, "fused, visual_only or motion_only (repeatable)");
    dispatch[sub] = c.fn;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*config_opt) opts.config = config_path;
  if (*seed_opt) opts.seed = seed;
  if (*variant_opt) opts.variant = variant;

  try {
    for (auto& [sub, fn] : dispatch) {
      if (sub->parsed()) return fn(opts);
    }
    return 2;
  } catch (const md::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const md::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mdesk
