#include <benchmark/benchmark.h>

#include "engage/dataset.hpp"
#include "synthetic.hpp"

namespace engage {
namespace {

std::vector<CommentRecord> corpus(std::size_t threads) {
  testing::SyntheticCorpusOptions o;
  o.threads = threads;
  o.seed = 3;
  return testing::synthetic_corpus(o);
}

void BM_BuildThreads(benchmark::State& state) {
  const auto records = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_threads(records, Signal::kUpvotes));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_BuildThreads)->Arg(200)->Arg(2000);

void BM_BuildDataset(benchmark::State& state) {
  const auto records = corpus(static_cast<std::size_t>(state.range(0)));
  const std::vector<int> bands{10, 25, 50};
  for (auto _ : state) benchmark::DoNotOptimize(build_dataset(records, Signal::kUpvotes, bands, 0.1, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_BuildDataset)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace engage
