#include <benchmark/benchmark.h>

#include "structeval/scm.hpp"

using namespace structeval;

static void BM_GenerateScm(benchmark::State& state) {
  ScmConfig cfg;
  cfg.n_train = state.range(0);
  cfg.n_test = 1;
  cfg.seed = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_scm(cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateScm)->Arg(10000)->Arg(100000);

static void BM_LogisticGradient(benchmark::State& state) {
  ScmConfig cfg;
  cfg.n_train = state.range(0);
  cfg.n_test = 1;
  cfg.seed = 5;
  auto data = generate_scm(cfg);
  for (auto _ : state) {
    double g_wd, g_ws, g_bias;
    logistic_gradient(data.train, 1.2, 0.8, -0.1, g_wd, g_ws, g_bias);
    benchmark::DoNotOptimize(g_wd);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogisticGradient)->Arg(100000);

static void BM_FitLogistic(benchmark::State& state) {
  ScmConfig cfg;
  cfg.n_train = 20000;
  cfg.n_test = 1;
  cfg.seed = 5;
  auto data = generate_scm(cfg);
  FitOptions options;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_logistic(data.train, options));
  }
}
BENCHMARK(BM_FitLogistic)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
