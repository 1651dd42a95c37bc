#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "exphedge/allocation.hpp"
#include "exphedge/basis.hpp"
#include "exphedge/claims.hpp"
#include "exphedge/market.hpp"
#include "exphedge/optimizer.hpp"
#include "exphedge/risk.hpp"

using namespace exphedge;

namespace {

MarketParams benchmark_market(int n_steps = 50) {
  return MarketParams::one_asset(0.1, 0.2, 0.0, 1.0, 1.0, n_steps);
}

ObjectiveData sample_objective(int n, int R) {
  std::mt19937 gen(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  ObjectiveData data;
  data.n_paths = n;
  data.n_features = R;
  data.n_assets = 1;
  data.gamma = 1.0;
  data.features.resize(static_cast<std::size_t>(n) * R);
  data.increments.resize(n);
  data.carry.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    data.features[static_cast<std::size_t>(i) * R] = 1.0;
    for (int r = 1; r < R; ++r) {
      data.features[static_cast<std::size_t>(i) * R + r] = normal(gen);
    }
    data.increments[i] = 0.03 * normal(gen);
  }
  return data;
}

void bm_simulate(benchmark::State& state) {
  const MarketParams m = benchmark_market();
  const std::int64_t n = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_gbm(m, {n, 1, false}));
  }
  state.SetItemsProcessed(state.iterations() * n * 50);
}

void bm_objective(benchmark::State& state) {
  const ObjectiveData data = sample_objective(static_cast<int>(state.range(0)), 3);
  const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(1, 3, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(objective_log(data, c));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_minimize(benchmark::State& state) {
  const ObjectiveData data = sample_objective(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize(data));
  }
}

void bm_learn(benchmark::State& state) {
  const MarketParams m = benchmark_market();
  const PathSet paths = simulate_gbm(m, {state.range(0), 3, false});
  const BasisSet basis = BasisSet::poly(2, m.spot0());
  for (auto _ : state) {
    benchmark::DoNotOptimize(learn(paths, Claim::put(1.0), basis, 1.0));
  }
}

void bm_risk_report(benchmark::State& state) {
  std::mt19937 gen(11);
  std::normal_distribution<double> normal(0.25, 0.5);
  std::vector<double> pnl(state.range(0));
  for (double& x : pnl) x = normal(gen);
  for (auto _ : state) {
    benchmark::DoNotOptimize(report(pnl));
  }
}

BENCHMARK(bm_simulate)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_objective)->Arg(10000)->Arg(100000);
BENCHMARK(bm_minimize)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_learn)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_risk_report)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
