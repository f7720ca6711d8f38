#include <benchmark/benchmark.h>

#include "engage/embeddings.hpp"
#include "engage/textstats.hpp"
#include "synthetic.hpp"

namespace engage {
namespace {

constexpr const char* kComment =
    "Don't panic!  The well-known vote was 52.5% in 2016, see https://x.co/a @bob. "
    "Honestly I think the whole thing was decided long before anyone read the small print.";

void BM_Tokenize(benchmark::State& state) {
  const std::string_view text(kComment);
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Tokenize);

void BM_Subwords(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(subwords("referendum"));
}
BENCHMARK(BM_Subwords);

void BM_SkipGramEpoch(benchmark::State& state) {
  const auto task = testing::planted_token_task(static_cast<std::size_t>(state.range(0)), 1);
  auto cfg = EmbeddingConfig::desk_scale();
  cfg.epochs = 1;
  std::int64_t tokens = 0;
  for (const auto& s : task.tokens) tokens += static_cast<std::int64_t>(s.size());
  for (auto _ : state) benchmark::DoNotOptimize(train_embeddings(task.tokens, cfg));
  state.SetItemsProcessed(state.iterations() * tokens);
}
BENCHMARK(BM_SkipGramEpoch)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace engage
