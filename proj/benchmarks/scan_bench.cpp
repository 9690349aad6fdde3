#include <benchmark/benchmark.h>

#include "metascanner/pipeline.hpp"
#include "metascanner/policy.hpp"
#include "metascanner/synth.hpp"

namespace ms = metascanner;

// Full scan stages on one in-memory scale-corpus package.
static void BM_ScanLoaded(benchmark::State& state) {
  ms::CorpusOptions opts;
  opts.max_nodes = static_cast<int>(state.range(0));
  const auto pkg = ms::build_corpus_package(0, opts);
  const auto rules = ms::compile_rules(ms::Policy::defaults());
  for (auto _ : state) benchmark::DoNotOptimize(ms::scan_loaded(pkg, rules, "bench", 1));
}
BENCHMARK(BM_ScanLoaded)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_AttackCorpus(benchmark::State& state) {
  const auto pkg = ms::build_attack_corpus();
  const auto rules = ms::compile_rules(ms::Policy::defaults());
  for (auto _ : state) benchmark::DoNotOptimize(ms::scan_loaded(pkg, rules, "bench", 1));
}
BENCHMARK(BM_AttackCorpus)->Unit(benchmark::kMillisecond);
