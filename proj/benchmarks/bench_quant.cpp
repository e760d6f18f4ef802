#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "requant/pipeline.hpp"
#include "requant/reshape.hpp"
#include "requant/search.hpp"
#include "requant/tensor.hpp"
#include "requant/uniform.hpp"

using namespace requant;

namespace {

WeightTensor gaussian_tensor(int64_t n, double sigma = 0.02) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> values(static_cast<size_t>(n));
  for (auto& v : values) v = dist(rng);
  return WeightTensor("bench", {n}, std::move(values));
}

void BM_loss_f(benchmark::State& state) {
  const auto tensor = gaussian_tensor(state.range(0));
  const BitWidth bits(8);
  double alpha = 0.9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_f(tensor, alpha, bits));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_loss_f)->Arg(1 << 10)->Arg(36864)->Arg(1 << 20);

void BM_loss_g(benchmark::State& state) {
  const auto tensor = gaussian_tensor(state.range(0));
  const auto objective = reshape_loss_objective(tensor, BitWidth(8));
  double alpha = 0.9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(objective(alpha));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_loss_g)->Arg(1 << 10)->Arg(36864)->Arg(1 << 20);

void BM_golden_search(benchmark::State& state) {
  const auto tensor = gaussian_tensor(state.range(0));
  const auto objective = uniform_loss_objective(tensor, BitWidth(8));
  const SearchSettings settings;
  for (auto _ : state) {
    benchmark::DoNotOptimize(golden_section(objective, settings));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 22);
}
BENCHMARK(BM_golden_search)->Arg(36864);

void BM_grid_oracle_1k(benchmark::State& state) {
  const auto tensor = gaussian_tensor(state.range(0));
  const auto objective = uniform_loss_objective(tensor, BitWidth(8));
  const SearchSettings settings;
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid_oracle(objective, settings, 1001));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1001);
}
BENCHMARK(BM_grid_oracle_1k)->Arg(10000);

void BM_quantize_layer_requant(benchmark::State& state) {
  const auto tensor = gaussian_tensor(state.range(0));
  PipelineConfig config;
  config.strategy = Strategy::kReshapeClip;
  config.bits_weights = BitWidth(4);
  config.first_last_bits = BitWidth(8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(quantize_layer(tensor, config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_quantize_layer_requant)->Arg(36864);

}  // namespace

BENCHMARK_MAIN();
