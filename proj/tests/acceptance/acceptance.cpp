// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "loss_fixture.hpp"
#include "motiondesk/ablation.hpp"
#include "motiondesk/embedding_cache.hpp"
#include "motiondesk/evaluate.hpp"
#include "motiondesk/kmeans.hpp"
#include "motiondesk/otsu.hpp"
#include "motiondesk/vlad.hpp"
#include "motiondesk/windows.hpp"
#include "oracles.hpp"
#include "test_support.hpp"
#include "tiny_run.hpp"

namespace fs = std::filesystem;
using namespace md;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

// Collects failed sub-checks of one criterion.
struct Checks {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Invocation {
  int code = 0;
  std::string err;
};

// Runs one mdesk command in-process with stdout and stderr captured.
Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "mdesk");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  Invocation r;
  r.code = mdesk::run(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.err = err.str();
  return r;
}

fs::path write_config(const fs::path& path, const RunConfig& config) {
  std::ofstream(path) << format_config(config);
  return path;
}

// ---- 1 ---------------------------------------------------------------------

void gradient_suite(Checks& c) {
  const auto start = Clock::now();
  std::size_t checked = 0, kinks = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    mdtest::LossFixture fx(seed);
    Rng rng(derive_seed(seed, 77));
    for (auto& loss : fx.losses()) {
      const auto params = fx.params(loss.groups);
      const mdtest::GradCheck r = mdtest::check_gradients(params, loss.build, 100, rng);
      const std::string tag = loss.name + " seed " + std::to_string(seed);
      c.expect(r.max_rel_error <= 1e-4, tag + fmt(" max rel error %.3g", r.max_rel_error));
      c.expect(r.checked >= 100, tag + " checked fewer than 100 coordinates");
      c.expect(r.kinks <= 15, tag + " hit " + std::to_string(r.kinks) + " kinks");
      worst = std::max(worst, r.max_rel_error);
      checked += r.checked;
      kinks += r.kinks;
    }
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 60.0, fmt("runtime %.1f s", elapsed));
  c.note("7 losses x 5 seeds, " + std::to_string(checked) + " coordinates, worst " + fmt("%.2e", worst) + ", " +
         std::to_string(kinks) + " kink draws skipped, " + fmt("%.1f s", elapsed));
}

// ---- 2 ---------------------------------------------------------------------

void oracle_suite(Checks& c) {
  Rng rng(2024);
  std::size_t otsu_mismatch = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(300), bins = 2 + rng.below(256);
    std::vector<double> v(n);
    for (double& x : v) x = trial % 4 == 0 ? std::floor(rng.uniform(0, 8)) : rng.uniform(0, 4) * rng.uniform();
    otsu_mismatch += otsu_threshold(v, bins) != mdtest::brute_force_otsu(v, bins);
  }
  c.expect(otsu_mismatch == 0, "otsu differs from brute-force scan on " + std::to_string(otsu_mismatch) + "/1000 inputs");

  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 80, dim = 2 + rng.below(3), k = 2 + rng.below(6);
    std::vector<double> pts(n * dim);
    for (double& x : pts) x = rng.normal() + (rng.below(2) ? 4.0 : 0.0);
    const KMeansResult r = kmeans(pts, dim, k, trial, 500);
    c.expect(r.converged, "kmeans trial " + std::to_string(trial) + " did not converge");
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i)
      c.expect(r.inertia_history[i] <= r.inertia_history[i - 1] * (1 + 1e-12),
               "kmeans inertia rose at pass " + std::to_string(i));
    // one more Lloyd step by hand must change nothing
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    bool stable = true;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = INFINITY;
      for (std::size_t j = 0; j < k; ++j) {
        double d = 0;
        for (std::size_t e = 0; e < dim; ++e) d += std::pow(pts[i * dim + e] - r.centroids[j * dim + e], 2);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      stable &= best == r.assignments[i];
      ++counts[best];
      for (std::size_t e = 0; e < dim; ++e) sums[best * dim + e] += pts[i * dim + e];
    }
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t e = 0; e < dim; ++e)
        stable &= counts[j] > 0 && std::abs(sums[j * dim + e] / counts[j] - r.centroids[j * dim + e]) <= 1e-12;
    c.expect(stable, "kmeans trial " + std::to_string(trial) + " is not a Lloyd fixed point");
  }

  auto vlad_case = [&](std::vector<FlowVector> centroids, std::vector<FlowVector> survivors, std::vector<double> want,
                       const std::string& name) {
    FlowCodebook book;
    book.centroids = std::move(centroids);
    const VladEmbedding v = vlad_from_entries(survivors, book);
    bool ok = v.values.size() == want.size();
    for (std::size_t i = 0; ok && i < want.size(); ++i) ok = std::abs(v.values[i] - want[i]) <= 1e-12;
    c.expect(ok, "VLAD hand case " + name);
  };
  // residual sums (0.1, 0.2) and (0.4, -0.3); signed roots already unit norm
  vlad_case({{0, 0}, {1, 0}}, {{0.1, 0.2}, {1.5, 0.0}, {0.9, -0.3}},
            {std::sqrt(0.1), std::sqrt(0.2), std::sqrt(0.4), -std::sqrt(0.3)}, "A");
  // residuals (1, 0) and (-2, 1); signed roots (1, 0, -sqrt2, 1) over norm 2
  vlad_case({{0, 0}, {2, 2}}, {{1, 0}, {0, 3}}, {0.5, 0.0, -std::sqrt(2.0) / 2.0, 0.5}, "B");

  const std::vector<std::size_t> one{10};
  const PairSets pairs = enumerate_windows_and_pairs(one, 5, 1, 0);
  const TupleSets tuples = enumerate_tuples(one, 5, 1, 0);
  const std::size_t brute_pairs = mdtest::brute_pairs(one, 5).size(), brute_triples = mdtest::brute_triples(one, 5).size();
  c.expect(pairs.positives.size() == brute_pairs, "positives differ from brute-force count");
  c.expect(tuples.neighbors.size() == brute_triples, "tuples differ from brute-force count");
  c.expect(pairs.positives.size() == 12, "expected 12 positives, got " + std::to_string(pairs.positives.size()));
  c.expect(tuples.neighbors.size() == 19, "expected 19 tuples, got " + std::to_string(tuples.neighbors.size()) +
                                              " (brute-force enumeration also gives " + std::to_string(brute_triples) + ")");
  c.note("L=10, dt=5: " + std::to_string(pairs.positives.size()) + " positives, " +
         std::to_string(tuples.neighbors.size()) + " tuples, brute force " + std::to_string(brute_pairs) + "/" +
         std::to_string(brute_triples));

  const RunConfig config = mdtest::tiny_run_config();
  const Corpus corpus = generate_synthetic_corpus(config.corpus);
  const auto clips = sample_clips(corpus.videos, config.train.k, config.train.interval);
  ModelBundle model = initialize_model(config.train);
  const auto features = first_frame_motion_features(model, clips);
  std::size_t retrieval_mismatch = 0;
  for (std::size_t q = 0; q < 20; ++q) {
    GrayImage query = corpus.test[q % corpus.test.size()].image;
    if (q >= corpus.test.size()) std::reverse(query.pixels.begin(), query.pixels.end());
    const std::vector<double> f = image_motion_feature(model, query);
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t j = 0; j < features.size(); ++j) {
      double s = 0;
      for (std::size_t i = 0; i < f.size(); ++i) s += (f[i] - features[j][i]) * (f[i] - features[j][i]);
      if (std::sqrt(s) < best_d) {
        best_d = std::sqrt(s);
        best = j;
      }
    }
    const Retrieval got = retrieve_nearest_clip(model, query, clips);
    retrieval_mismatch += got.clip_index != best || std::abs(got.distance - best_d) > 1e-12;
  }
  c.expect(retrieval_mismatch == 0, "retrieval differs from linear scan on " + std::to_string(retrieval_mismatch) + "/20 queries");
}

// ---- 3 ---------------------------------------------------------------------

void structural_suite(Checks& c) {
  const RunConfig config = mdtest::tiny_run_config();
  const Corpus corpus = generate_synthetic_corpus(config.corpus);
  const TrainingSet data = make_training_set(corpus.train, mdtest::pseudo_labelled_clips(config, corpus));
  std::size_t steps = 0;
  for (Variant variant : all_variants()) {
    TrainConfig cfg = config.train;
    cfg.variant = variant;
    ModelBundle model = initialize_model(cfg);
    TrainLog log;
    for (std::size_t step : variant_steps(variant)) {
      std::set<const Parameter*> allowed;
      for (ParamGroup g : update_set(variant, step))
        for (const Parameter* p : model.params({g})) allowed.insert(p);
      std::vector<Tensor> before;
      for (const Parameter* p : model.all_params()) before.push_back(p->value);
      run_step(cfg, data, variant, step, model, log);
      const auto after = model.all_params();
      for (std::size_t i = 0; i < after.size(); ++i) {
        if (allowed.count(after[i])) continue;
        const bool same = std::equal(before[i].data().begin(), before[i].data().end(), after[i]->value.data().begin());
        c.expect(same, std::string(variant_name(variant)) + " step " + std::to_string(step) + " changed " + after[i]->name);
      }
      ++steps;
    }
  }
  c.note("freezing contract on " + std::to_string(steps) + " (variant, step) pairs");

  Rng rng(33);
  ModelBundle m = ModelBundle::create(mdtest::tiny_dims(), 33);
  for (Parameter* p : m.theta_g.all()) p->value = mdtest::random_tensor(p->value.shape(), rng, -4.0, 4.0);
  {
    Graph g(Trainable::none);
    Var f = g.constant(mdtest::random_tensor({5, 6}, rng, -3.0, 3.0));
    const Tensor video = motion_feature_video(g, m.theta_g, std::span<const Var>(&f, 1)).value();
    const Tensor image = motion_feature_image(g, m.theta_g, f).value();
    c.expect(video == image, "1-frame motion_feature_video differs from motion_feature_image");
  }
  double lo = 0, hi = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Graph g(Trainable::none);
    std::vector<Var> frames;
    const std::size_t len = 1 + rng.below(12);
    for (std::size_t t = 0; t < len; ++t) frames.push_back(g.constant(mdtest::random_tensor({4, 6}, rng, -50.0, 50.0)));
    for (double x : motion_feature_video(g, m.theta_g, frames).value().data()) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  c.expect(lo >= -1.0 && hi <= 1.0, fmt("motion features reach %.17g", lo < -1.0 ? lo : hi));

  double worst = 0;
  for (HeadParams* head : {&m.theta_c, &m.theta_m, &m.theta_a}) {
    for (Parameter* p : head->all()) p->value = mdtest::random_tensor(p->value.shape(), rng, -3.0, 3.0);
    Graph g(Trainable::none);
    const Tensor x = mdtest::random_tensor({64, head->input_width()}, rng, -40.0, 40.0);
    const Tensor p = classify(g, *head, g.constant(x)).value();
    const std::size_t cols = p.dim(1);
    for (std::size_t r = 0; r < p.dim(0); ++r) {
      double s = 0;
      for (std::size_t j = 0; j < cols; ++j) s += p[r * cols + j];
      worst = std::max(worst, std::abs(s - 1.0));
    }
  }
  c.expect(worst <= 1e-12, fmt("softmax row sum off by %.3g", worst));
}

// ---- 4 and 5 ---------------------------------------------------------------

struct GridRun {
  bool ok = false;
  double grid_seconds = 0.0;
  std::string error;
};

// gen-data, features, pseudo-label and ablate with the default config into dir.
GridRun default_grid(const fs::path& dir) {
  GridRun r;
  const std::string data = (dir / "data").string(), out = (dir / "out").string();
  for (const auto& args : std::vector<std::vector<std::string>>{{"gen-data", "--out", data},
                                                               {"features", "--data", data, "--out", out},
                                                               {"pseudo-label", "--out", out}}) {
    const Invocation inv = invoke(args);
    if (inv.code != 0) {
      r.error = args[0] + " exited " + std::to_string(inv.code) + ": " + inv.err;
      return r;
    }
  }
  const auto start = Clock::now();
  const Invocation inv = invoke({"ablate", "--data", data, "--out", out});
  r.grid_seconds = seconds_since(start);
  if (inv.code != 0) {
    r.error = "ablate exited " + std::to_string(inv.code) + ": " + inv.err;
    return r;
  }
  r.ok = true;
  return r;
}

void relative_improvement(Checks& c, const fs::path& dir, const GridRun& run) {
  if (!run.ok) {
    c.expect(false, run.error);
    return;
  }
  std::map<std::string, std::pair<double, std::size_t>> fused;
  std::istringstream csv(slurp(dir / "out" / "results.csv"));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string variant, seed, mode, acc;
    std::getline(row, variant, ',');
    std::getline(row, seed, ',');
    std::getline(row, mode, ',');
    std::getline(row, acc, ',');
    if (mode != "fused") continue;
    fused[variant].first += std::stod(acc);
    ++fused[variant].second;
  }
  auto mean = [&](const std::string& v) { return fused[v].second ? fused[v].first / fused[v].second : NAN; };
  for (const char* v : {"unreg", "unreg+motion", "unreg+smooth1", "unreg+smooth2", "full"})
    c.expect(fused[v].second == 5, std::string(v) + " has " + std::to_string(fused[v].second) + " seeds");
  const double full = mean("full"), unreg = mean("unreg"), motion = mean("unreg+motion");
  c.expect(full > unreg, fmt("mean full %.4f", full) + fmt(" does not exceed mean unreg %.4f", unreg));
  c.expect(motion >= unreg, fmt("mean unreg+motion %.4f", motion) + fmt(" below mean unreg %.4f", unreg));
  c.expect(run.grid_seconds < 600.0, fmt("5x5 grid took %.0f s", run.grid_seconds));
  std::string means;
  for (const char* v : {"unreg", "unreg+motion", "unreg+smooth1", "unreg+smooth2", "full"})
    means += std::string(means.empty() ? "" : ", ") + v + fmt(" %.4f", mean(v));
  c.note("means over 5 seeds: " + means + fmt("; grid %.0f s on ", run.grid_seconds) +
         std::to_string(mdesk::worker_threads()) + " thread(s)");
}

void determinism(Checks& c, const fs::path& a, const GridRun& ra, const fs::path& b, const GridRun& rb) {
  if (!ra.ok || !rb.ok) {
    c.expect(false, ra.ok ? rb.error : ra.error);
    return;
  }
  c.expect(slurp(a / "out" / "results.csv") == slurp(b / "out" / "results.csv"), "results.csv differs");
  c.expect(slurp(a / "out" / "embeddings.mdemb") == slurp(b / "out" / "embeddings.mdemb"), "embedding cache differs");
  c.expect(slurp(a / "out" / "pseudo_labels.tsv") == slurp(b / "out" / "pseudo_labels.tsv"), "pseudo labels differ");
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a / "out" / "cells")) {
    if (!e.is_regular_file()) continue;
    const fs::path other = b / "out" / fs::relative(e.path(), a / "out");
    c.expect(fs::exists(other) && slurp(e.path()) == slurp(other), "checkpoint differs: " + fs::relative(e.path(), a).string());
    ++compared;
  }
  c.expect(compared == 25, std::to_string(compared) + " checkpoints compared, expected 25");
  c.note("results.csv and " + std::to_string(compared) + " checkpoints byte-identical across two default runs");
}

// ---- 6 ---------------------------------------------------------------------

void degenerate_inputs(Checks& c, const fs::path& dir) {
  {
    RunConfig still;
    still.corpus.static_videos = true;
    const std::string cfg = write_config(dir / "static.cfg", still).string();
    const std::string data = (dir / "static_data").string(), out = (dir / "static_out").string();
    bool warned = false;
    for (const auto& args : std::vector<std::vector<std::string>>{{"gen-data", "--out", data},
                                                                 {"features", "--data", data, "--out", out},
                                                                 {"pseudo-label", "--out", out},
                                                                 {"train", "--data", data, "--out", out},
                                                                 {"eval", "--data", data, "--out", out},
                                                                 {"retrieve", "--data", data, "--out", out}}) {
      std::vector<std::string> full{"--config", cfg};
      full.insert(full.end(), args.begin(), args.end());
      const Invocation inv = invoke(full);
      c.expect(inv.code == 0, "static corpus: " + args[0] + " exited " + std::to_string(inv.code) + " " + inv.err);
      if (args[0] == "features") warned = inv.err.find("warning") != std::string::npos;
    }
    c.expect(warned, "static corpus: features emitted no warning");
    const EmbeddingTable table = load_embeddings(fs::path(out) / "embeddings.mdemb");
    bool zero = table.rows.size() == still.corpus.videos;
    for (const auto& row : table.rows)
      for (double x : row) zero &= x == 0.0;
    c.expect(zero, "static corpus: motion embeddings are not all zero");
  }
  {
    RunConfig single;
    single.corpus.classes = 1;
    single.train.dims.classes = 1;
    const std::string cfg = write_config(dir / "single.cfg", single).string();
    const std::string data = (dir / "single_data").string(), out = (dir / "single_out").string();
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"gen-data", "--out", data},
             {"features", "--data", data, "--out", out},
             {"pseudo-label", "--out", out},
             {"train", "--data", data, "--out", out},
             {"eval", "--data", data, "--out", out, "--mode", "fused", "--mode", "visual_only", "--mode", "motion_only"}}) {
      std::vector<std::string> full{"--config", cfg};
      full.insert(full.end(), args.begin(), args.end());
      const Invocation inv = invoke(full);
      c.expect(inv.code == 0, "C=1 corpus: " + args[0] + " exited " + std::to_string(inv.code) + " " + inv.err);
    }
    std::istringstream csv(slurp(fs::path(out) / "eval.csv"));
    std::string line;
    std::getline(csv, line);
    std::size_t modes = 0;
    while (std::getline(csv, line)) {
      std::istringstream row(line);
      std::string mode, acc;
      std::getline(row, mode, ',');
      std::getline(row, acc, ',');
      c.expect(std::stod(acc) == 1.0, "C=1 corpus: " + mode + " accuracy " + acc);
      ++modes;
    }
    c.expect(modes == 3, "C=1 corpus: " + std::to_string(modes) + " modes evaluated");
  }
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "mdesk_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  bool all = true;
  auto report = [&](int id, const std::string& name, const Checks& c) {
    const bool ok = c.failures.empty();
    all &= ok;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << " (" << name << ")";
    for (const std::string& n : c.notes) std::cout << " | " << n;
    for (const std::string& f : c.failures) std::cout << " | failed: " << f;
    std::cout << std::endl;
  };
  auto criterion = [&](int id, const std::string& name, const std::function<void(Checks&)>& body) {
    Checks c;
    try {
      body(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    report(id, name, c);
  };

  criterion(1, "gradient suite", gradient_suite);
  criterion(2, "oracle suite", oracle_suite);
  criterion(3, "structural suite", structural_suite);

  GridRun first, second;
  try {
    first = default_grid(root / "grid_a");
    second = default_grid(root / "grid_b");
  } catch (const std::exception& e) {
    first.error = second.error = e.what();
  }
  criterion(4, "relative improvement", [&](Checks& c) { relative_improvement(c, root / "grid_a", first); });
  criterion(5, "determinism", [&](Checks& c) { determinism(c, root / "grid_a", first, root / "grid_b", second); });
  criterion(6, "degenerate inputs", [&](Checks& c) { degenerate_inputs(c, root); });

  fs::remove_all(root);
  return all ? 0 : 1;
}
