#include <benchmark/benchmark.h>

#include <vector>

#include "motiondesk/config.hpp"
#include "motiondesk/corpus.hpp"
#include "motiondesk/flow.hpp"
#include "motiondesk/kmeans.hpp"
#include "motiondesk/nets.hpp"
#include "motiondesk/otsu.hpp"
#include "motiondesk/train.hpp"
#include "motiondesk/vlad.hpp"
#include "test_support.hpp"

using namespace md;

namespace {

const NetDims kDims = TrainConfig{}.dims;

std::vector<GrayImage> images(std::size_t n, std::size_t size, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GrayImage> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(mdtest::random_image(size, rng));
  return out;
}

std::vector<const GrayImage*> pointers(const std::vector<GrayImage>& v) {
  std::vector<const GrayImage*> out;
  for (const auto& i : v) out.push_back(&i);
  return out;
}

}  // namespace

static void BM_Matmul(benchmark::State& state) {
  const std::size_t n = state.range(0);
  Rng rng(1);
  const Tensor a = mdtest::random_tensor({n, n}, rng), b = mdtest::random_tensor({n, n}, rng);
  for (auto _ : state) {
    Graph g(Trainable::none);
    benchmark::DoNotOptimize(matmul(g.constant(a), g.constant(b)).value().data().data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

static void BM_EncoderForward(benchmark::State& state) {
  ModelBundle m = ModelBundle::create(kDims, 1);
  const auto imgs = images(state.range(0), kDims.image_size, 2);
  const auto ptrs = pointers(imgs);
  for (auto _ : state) {
    Graph g(Trainable::none);
    benchmark::DoNotOptimize(encode(g, m.theta_n, image_batch(g, ptrs, kDims.image_size)).value().data().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncoderForward)->Arg(1)->Arg(16);

static void BM_EncoderForwardBackward(benchmark::State& state) {
  ModelBundle m = ModelBundle::create(kDims, 1);
  const auto imgs = images(state.range(0), kDims.image_size, 3);
  const auto ptrs = pointers(imgs);
  const auto params = m.params({ParamGroup::encoder, ParamGroup::visual_head});
  for (auto _ : state) {
    Graph g{std::span<Parameter* const>(params)};
    g.backward(sum(classify(g, m.theta_c, encode(g, m.theta_n, image_batch(g, ptrs, kDims.image_size)))));
    for (Parameter* p : params) p->value.clear_grad();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncoderForwardBackward)->Arg(16);

static void BM_GruSequence(benchmark::State& state) {
  ModelBundle m = ModelBundle::create(kDims, 4);
  Rng rng(4);
  std::vector<Tensor> frames;
  for (int t = 0; t < state.range(0); ++t) frames.push_back(mdtest::random_tensor({4, kDims.visual_dim}, rng, 0.0, 1.0));
  for (auto _ : state) {
    Graph g(Trainable::none);
    std::vector<Var> vars;
    for (const Tensor& f : frames) vars.push_back(g.constant(f));
    benchmark::DoNotOptimize(motion_feature_video(g, m.theta_g, vars).value().data().data());
  }
}
BENCHMARK(BM_GruSequence)->Arg(10)->Arg(40);

static void BM_Flow(benchmark::State& state) {
  CorpusConfig cfg;
  const auto frames = render_instance(cfg, 0, 4, 5);
  for (auto _ : state) benchmark::DoNotOptimize(compute_flow(frames[0], frames[3]).entries.data());
}
BENCHMARK(BM_Flow);

static void BM_Otsu(benchmark::State& state) {
  Rng rng(6);
  std::vector<double> v(state.range(0));
  for (double& x : v) x = rng.uniform(0, 3) * rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(otsu_threshold(v));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Otsu)->Arg(1 << 12)->Arg(1 << 16);

static void BM_KMeans(benchmark::State& state) {
  Rng rng(7);
  std::vector<double> pts(2 * state.range(0));
  for (double& x : pts) x = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(pts, 2, 16, 0).inertia);
}
BENCHMARK(BM_KMeans)->Arg(2000)->Arg(20000);

static void BM_VladEncode(benchmark::State& state) {
  CorpusConfig cfg;
  const auto frames = render_instance(cfg, 1, 4, 8);
  const FlowField flow = compute_flow(frames[0], frames[3]);
  const std::vector<FlowField> flows{flow};
  const FlowCodebook book = build_flow_codebook(flows, 0.0, 16, 0);
  for (auto _ : state) benchmark::DoNotOptimize(vlad_encode(flow, 0.0, book).values.data());
}
BENCHMARK(BM_VladEncode);

static void BM_TrainStep1(benchmark::State& state) {
  CorpusConfig cc;
  const Corpus corpus = generate_synthetic_corpus(cc);
  TrainConfig tc;
  tc.iterations[0] = state.range(0);
  const TrainingSet data = make_training_set(corpus.train, {});
  for (auto _ : state) {
    ModelBundle m = initialize_model(tc);
    TrainLog log;
    run_step(tc, data, Variant::unreg, 1, m, log);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep1)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
