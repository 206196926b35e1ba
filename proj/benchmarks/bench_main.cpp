#include <benchmark/benchmark.h>

#include "dplace/generator.hpp"
#include "dplace/optimizer.hpp"
#include "dplace/rl.hpp"
#include "dplace/simulation.hpp"

namespace dplace {
namespace {

Scenario bench_scenario(int workflows) {
  GeneratorConfig g;
  g.workflows = workflows;
  g.seed = 7;
  return generate_scenario(g);
}

// One particle evaluation: decode, repair, build-stage transfer time.
void BM_BuildFitness(benchmark::State& state) {
  const Scenario s = bench_scenario(static_cast<int>(state.range(0)));
  BuildObjective objective(s);
  Rng rng(1);
  std::uniform_int_distribution<DcId> any(0, s.num_datacenters() - 1);
  std::vector<DcId> positions(objective.dimension());
  for (auto _ : state) {
    for (DcId& p : positions) p = any(rng);
    benchmark::DoNotOptimize(objective.cost(positions));
  }
  state.counters["datasets"] = s.num_datasets();
}
BENCHMARK(BM_BuildFitness)->Arg(4)->Arg(8)->Arg(16);

void BM_DeDpsoSearch(benchmark::State& state) {
  const Scenario s = bench_scenario(4);
  OptimizerConfig cfg;
  cfg.n = 50;
  cfg.itermax = static_cast<int>(state.range(0));
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(run_de_dpso(s, cfg).time);
  }
}
BENCHMARK(BM_DeDpsoSearch)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_NetworkUpdate(benchmark::State& state) {
  const StateLayout layout{8, 44};
  Rng rng(2);
  NetParams params = make_net_params(layout.state_dim(), layout.action_dim(), 64, rng);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Transition> store(32);
  for (Transition& t : store) {
    t.state = Vector::NullaryExpr(layout.state_dim(), [&] { return u(rng); });
    t.next_state = Vector::NullaryExpr(layout.state_dim(), [&] { return u(rng); });
    t.action = Vector::NullaryExpr(layout.action_dim(), [&] { return u(rng); });
    t.reward = u(rng);
  }
  std::vector<const Transition*> batch;
  for (const Transition& t : store) batch.push_back(&t);
  const ActionCodec codec{layout, 0.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(update_networks(batch, params, 1e-3, 1e-3, 0.99, &codec).critic_loss);
    soft_update(params.critic, params.critic_target, 0.01);
    soft_update(params.actor, params.actor_target, 0.01);
  }
}
BENCHMARK(BM_NetworkUpdate)->Unit(benchmark::kMicrosecond);

// Full runtime stage with producer placement on a fixed build.
void BM_SimulationRun(benchmark::State& state) {
  const Scenario s = bench_scenario(static_cast<int>(state.range(0)));
  OptimizerConfig cfg;
  cfg.n = 10;
  cfg.itermax = 10;
  const BuildResult build = run_de_dpso(s, cfg);
  for (auto _ : state) {
    ProducerPlacer placer;
    benchmark::DoNotOptimize(run_runtime(s, build, placer, FetchAccounting::kOncePerDestination).total);
  }
}
BENCHMARK(BM_SimulationRun)->Arg(4)->Arg(16)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace dplace

BENCHMARK_MAIN();
