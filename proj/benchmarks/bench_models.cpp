#include <benchmark/benchmark.h>

#include "engage/models/cnn.hpp"
#include "engage/models/gru.hpp"
#include "engage/rng.hpp"

namespace engage {
namespace {

ModelInput random_input(Rng& rng, Eigen::Index len, int dim) {
  std::vector<std::string> tokens;
  Eigen::MatrixXd rows(len, dim);
  for (Eigen::Index t = 0; t < len; ++t) {
    tokens.push_back("w" + std::to_string(t));
    for (int d = 0; d < dim; ++d) rows(t, d) = rng.normal();
  }
  return make_text_input(std::move(tokens), std::move(rows));
}

template <class Model, class Config>
void forward(benchmark::State& state, Config config) {
  Model m(config);
  Rng rng(1);
  m.initialize(rng);
  const auto in = random_input(rng, state.range(0), config.dim);
  for (auto _ : state) benchmark::DoNotOptimize(m.logits(in));
}

template <class Model, class Config>
void forward_backward(benchmark::State& state, Config config) {
  Model m(config);
  Rng rng(1);
  m.initialize(rng);
  const auto in = random_input(rng, state.range(0), config.dim);
  Rng dropout(2);
  for (auto _ : state) {
    m.params().zero_grad();
    benchmark::DoNotOptimize(m.accumulate(in, 1, 1.0, &dropout));
  }
}

void BM_GruForward(benchmark::State& s) { forward<GruModel>(s, GruConfig{.dim = 16}); }
void BM_GruForwardBackward(benchmark::State& s) { forward_backward<GruModel>(s, GruConfig{.dim = 16}); }
void BM_CnnForward(benchmark::State& s) { forward<CnnModel>(s, CnnConfig{.dim = 16}); }
void BM_CnnForwardBackward(benchmark::State& s) { forward_backward<CnnModel>(s, CnnConfig{.dim = 16}); }

BENCHMARK(BM_GruForward)->Arg(20)->Arg(100);
BENCHMARK(BM_GruForwardBackward)->Arg(20)->Arg(100);
BENCHMARK(BM_CnnForward)->Arg(20)->Arg(100);
BENCHMARK(BM_CnnForwardBackward)->Arg(20)->Arg(100);

}  // namespace
}  // namespace engage
