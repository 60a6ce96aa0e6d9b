#include <benchmark/benchmark.h>

#include "structeval/intervene.hpp"
#include "structeval/rng.hpp"
#include "structeval/text.hpp"

using namespace structeval;

namespace {

std::vector<Sample> mult_samples(size_t n) {
  Rng rng(3);
  std::vector<Sample> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const long a = 10 + static_cast<long>(rng.next_below(90));
    const long b = 10 + static_cast<long>(rng.next_below(90));
    out.push_back({"s" + std::to_string(i),
                   "What is " + std::to_string(a) + " times " + std::to_string(b) + "?",
                   std::to_string(a * b), std::nullopt, "mult"});
  }
  return out;
}

TaskConfig mask_task() {
  TaskConfig task;
  task.strategy = Strategy::Mask;
  task.mask.core_word_pool = {"times"};
  task.mask.all_digit_tokens = true;
  return task;
}

} // namespace

static void BM_TokenizeWords(benchmark::State& state) {
  const std::string question =
      "Kyle bought last year's best-selling book for $19.50, which is 25 "
      "percent off the original price; what was the original price?";
  for (auto _ : state) {
    benchmark::DoNotOptimize(tokenize_words(question));
  }
}
BENCHMARK(BM_TokenizeWords);

static void BM_GenerateMaskSets(benchmark::State& state) {
  auto samples = mult_samples(static_cast<size_t>(state.range(0)));
  TaskConfig task = mask_task();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        generate_intervention_sets(samples, Strategy::Mask, task, 2, nullptr));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}
BENCHMARK(BM_GenerateMaskSets)->Arg(100)->Arg(1000);
