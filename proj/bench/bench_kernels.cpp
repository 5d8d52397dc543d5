// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "lsh/experiment.hpp"
#include "lsh/graph.hpp"
#include "lsh/skills.hpp"

using namespace lsh;

namespace {

PointCloud pinball_points(std::size_t n) {
  return sample_pinball_states(PinballGeometry::load(data_dir() / "pinball.json"), n, 0);
}

void BM_KnnParallel(benchmark::State& state) {
  const auto pts = pinball_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(knn_graph(pts, 10, 4.0));
}

void BM_KnnSerial(benchmark::State& state) {
  const auto pts = pinball_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::knn_graph(pts, 10, 4.0));
}

struct TrainingFixture {
  PrimitiveModel model;
  OptionHierarchy options;

  explicit TrainingFixture(const Env& env) {
    const auto tg = extract_transition_graph(env);
    model = PrimitiveModel::from_env(env, tg.index);
    options = OptionHierarchy::build(prune(run_louvain(tg.graph, 0.05, 0)), model);
  }
};

void BM_OptionTrainingParallel(benchmark::State& state) {
  const TrainingFixture f(*make_env(EnvSpec::parse("office"), 0));
  for (auto _ : state) {
    auto oh = f.options;
    benchmark::DoNotOptimize(train_option_policies(oh, f.model));
  }
}

void BM_OptionTrainingSerial(benchmark::State& state) {
  const TrainingFixture f(*make_env(EnvSpec::parse("office"), 0));
  for (auto _ : state) {
    auto oh = f.options;
    benchmark::DoNotOptimize(reference::train_option_policies(oh, f.model));
  }
}

ExperimentConfig fan_out_config(bool parallel) {
  ExperimentConfig cfg;
  cfg.env = EnvSpec::parse("rooms");
  cfg.agent = AgentSpec::parse("louvain");
  cfg.runs = 16;
  cfg.epochs = 10;
  cfg.parallel = parallel;
  return cfg;
}

void BM_RunsParallel(benchmark::State& state) {
  const auto cfg = fan_out_config(true);
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg));
}

void BM_RunsSerial(benchmark::State& state) {
  const auto cfg = fan_out_config(false);
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg));
}

}  // namespace

BENCHMARK(BM_KnnParallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnSerial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OptionTrainingParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OptionTrainingSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunsParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunsSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
