#include <benchmark/benchmark.h>

#include <random>

#include "remsched/dqn.hpp"
#include "remsched/mdp_solver.hpp"
#include "remsched/system_gen.hpp"

using namespace remsched;

namespace {

GeneratedSystem system_2x1() { return generate_random_system(2, 1, SystemGenSpec{}, 1); }

void BM_ValueIteration2x1(benchmark::State& state) {
  const auto sys = system_2x1();
  StateSpace space(2, 1, 5, static_cast<int>(state.range(0)));
  MdpModel model(space, sys.channel, sys.processes, RewardKind::sum_mse);
  for (auto _ : state) {
    benchmark::DoNotOptimize(value_iteration(model, ViOptions{0.95, 1e-8, 200000}));
  }
}
BENCHMARK(BM_ValueIteration2x1)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_EnvStep(benchmark::State& state) {
  const auto sys = system_2x1();
  Environment env(sys.channel, sys.processes, RewardKind::sum_mse, {}, 3);
  const ScheduleAction a{{1, 0}};
  for (auto _ : state) benchmark::DoNotOptimize(env.step(a));
}
BENCHMARK(BM_EnvStep);

void BM_MlpForwardBackward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  Mlp net = Mlp::random({24, 256, 256, 120}, Mlp::Output::linear, rng);
  const Eigen::MatrixXf x = Eigen::MatrixXf::Random(24, 128);
  const Eigen::MatrixXf up = Eigen::MatrixXf::Random(120, 128);
  for (auto _ : state) {
    Mlp::Cache cache;
    benchmark::DoNotOptimize(net.forward(x, &cache));
    benchmark::DoNotOptimize(net.backward(cache, up));
  }
}
BENCHMARK(BM_MlpForwardBackward);

void BM_DqnTrainStep(benchmark::State& state) {
  const auto sys = generate_random_system(6, 3, SystemGenSpec{}, 2);
  Environment env(sys.channel, sys.processes, RewardKind::sum_mse, {}, 4);
  DqnConfig cfg;
  cfg.loose_episodes = 1;
  cfg.tight_episodes = 0;
  cfg.conventional_episodes = 0;
  cfg.steps_per_episode = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train_se_dqn(env, cfg));
}
BENCHMARK(BM_DqnTrainStep)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
