#include <benchmark/benchmark.h>

#include "engage/explain.hpp"
#include "engage/models/gru.hpp"
#include "engage/rng.hpp"

namespace engage {
namespace {

struct Fixture {
  GruModel model{GruConfig{.dim = 16}};
  ModelInput input;

  explicit Fixture(Eigen::Index len) {
    Rng rng(4);
    model.initialize(rng);
    std::vector<std::string> tokens;
    Eigen::MatrixXd rows(len, 16);
    for (Eigen::Index t = 0; t < len; ++t) {
      tokens.push_back("w" + std::to_string(t));
      for (int d = 0; d < 16; ++d) rows(t, d) = rng.normal();
    }
    input = make_text_input(std::move(tokens), std::move(rows));
  }
};

void BM_Lrp(benchmark::State& state) {
  Fixture f(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(relevance_lrp(f.model, f.input, 1));
}
BENCHMARK(BM_Lrp)->Arg(20)->Arg(100);

void BM_Sa(benchmark::State& state) {
  Fixture f(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(relevance_sa(f.model, f.input, 1));
}
BENCHMARK(BM_Sa)->Arg(20)->Arg(100);

void BM_IntegratedGradients(benchmark::State& state) {
  Fixture f(20);
  const int steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integrated_gradients(f.model, f.input, 1, steps));
}
BENCHMARK(BM_IntegratedGradients)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace engage
