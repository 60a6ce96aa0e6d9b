#include <benchmark/benchmark.h>

#include "structeval/estimate.hpp"
#include "structeval/rng.hpp"

using namespace structeval;

namespace {

std::vector<PairGroup> synthetic_groups(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<PairGroup> groups;
  groups.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    PairGroup g;
    g.origin_id = "o" + std::to_string(i);
    g.t1_changed = {rng.next_bernoulli(0.8), rng.next_bernoulli(0.8)};
    g.t0_changed = {rng.next_bernoulli(0.2), rng.next_bernoulli(0.2)};
    groups.push_back(std::move(g));
  }
  return groups;
}

} // namespace

static void BM_PsPnIdentity(benchmark::State& state) {
  Rng rng(7);
  std::vector<PairedCounts> tables;
  for (int i = 0; i < 1024; ++i) {
    const int64_t m = 1 + static_cast<int64_t>(rng.next_below(1000));
    const int64_t n11 = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(m + 1)));
    const int64_t n01 = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(n11 + 1)));
    tables.push_back({n11, m - n11, n01, m - n01});
  }
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ps_pn_identity_check(tables[i++ & 1023]));
  }
}
BENCHMARK(BM_PsPnIdentity);

static void BM_BootstrapCi(benchmark::State& state) {
  auto groups = synthetic_groups(static_cast<size_t>(state.range(0)), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        bootstrap_ci(groups, RateMetric::Adce, 1000, 0.95, 3));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BootstrapCi)->Arg(100)->Arg(1000)->Complexity(benchmark::oN);

static void BM_ChangeRates(benchmark::State& state) {
  Rng rng(13);
  std::vector<OutcomeRecord> t1, t0;
  for (int i = 0; i < state.range(0); ++i) {
    OutcomeRecord o;
    o.sample_ref = "p" + std::to_string(i);
    o.stage = Stage::T1;
    o.changed_vs_origin = rng.next_bernoulli(0.8);
    t1.push_back(o);
    o.stage = Stage::T0;
    o.changed_vs_origin = rng.next_bernoulli(0.2);
    t0.push_back(o);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(change_rates(t1, t0));
  }
}
BENCHMARK(BM_ChangeRates)->Arg(10000);
