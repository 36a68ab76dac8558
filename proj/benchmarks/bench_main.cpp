#include <benchmark/benchmark.h>

#include <random>

#include "cpcr/analysis.hpp"
#include "cpcr/encoder.hpp"
#include "cpcr/mlp.hpp"

using namespace cpcr;

namespace {

DiscreteDataset points(std::size_t n, std::size_t dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> v(1, 10);
  DiscreteDataset d;
  d.grid = 10;
  d.class_names = {"a", "b"};
  for (std::size_t i = 0; i < n; ++i) {
    DiscretePoint p;
    p.grid = 10;
    p.case_id = i;
    p.label = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < dims; ++j) p.values.push_back(v(rng));
    d.points.push_back(std::move(p));
  }
  return d;
}

void BM_Encode(benchmark::State& state) {
  const auto d = points(256, static_cast<std::size_t>(state.range(0)), 1);
  EncodingConfig cfg;
  cfg.cell_px = 3;
  cfg.collision = static_cast<Collision>(state.range(1));
  const auto pairing = Pairing::identity(d.dims());
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode(d.points[i++ % d.size()], pairing, cfg));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Encode)
    ->ArgsProduct({{10, 34}, {static_cast<int>(Collision::overwrite_last), static_cast<int>(Collision::spiral_adjacent),
                              static_cast<int>(Collision::strip_split)}});

void BM_Forward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const MlpModel m = make_mlp(side * side, 2, 1);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(side * side, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, x));
}
BENCHMARK(BM_Forward)->Arg(10)->Arg(30)->Arg(60);

void BM_TrainEpoch(benchmark::State& state) {
  const int inputs = 900;
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(n, inputs);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = i % 2;
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(make_mlp(inputs, 2, 3), x, y, cfg));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TrainEpoch)->Arg(256)->Arg(1024);

void BM_PairFrequency(benchmark::State& state) {
  const auto d = points(static_cast<std::size_t>(state.range(0)), 10, 4);
  const auto pairing = Pairing::identity(10);
  const auto cells = icc_cells(10, 2);
  for (auto _ : state)
    for (const auto& c : cells) benchmark::DoNotOptimize(pair_frequency(d, pairing, c));
}
BENCHMARK(BM_PairFrequency)->Arg(683)->Arg(10000);

}  // namespace
BENCHMARK_MAIN();
