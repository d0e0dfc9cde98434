#include <cmath>

#include "doctest.h"
#include "remsched/environment.hpp"
#include "remsched/system_gen.hpp"

using namespace remsched;

namespace {

const std::vector<double> kPaperDrops{0.2, 0.15, 0.1, 0.05, 0.01};

ChannelModel degenerate_top_level_model() {
  return ChannelModel::make(1, 1, kPaperDrops, {{0, 0, 0, 0, 1}});
}

ChannelModel two_sensor_model(double drop) {
  // Single level: deterministic channel state with a chosen drop probability.
  return ChannelModel::make(2, 1, {drop}, {{1.0}, {1.0}});
}

std::vector<ProcessModel> two_scalar_processes(double a = 1.2) {
  Eigen::MatrixXd A(1, 1), C(1, 1), I(1, 1);
  A << a;
  C << 1.0;
  I << 1.0;
  std::vector<ProcessModel> out;
  out.push_back(ProcessModel::make(A, C, I, I));
  out.push_back(ProcessModel::make(A, C, I, I));
  return out;
}

}  // namespace

TEST_CASE("channel model validation") {
  CHECK_THROWS_AS(ChannelModel::make(1, 1, {0.1, 0.2}, {{0.5, 0.5}}), ValidationError);  // rising
  CHECK_THROWS_AS(ChannelModel::make(1, 1, {0.2, 0.1}, {{0.6, 0.5}}), ValidationError);  // sum
  CHECK_THROWS_AS(ChannelModel::make(1, 2, {0.1}, {{1.0}, {1.0}}), ValidationError);  // M > N
  const auto m = ChannelModel::make(1, 1, kPaperDrops, {{0.2, 0.2, 0.2, 0.2, 0.2}});
  CHECK(m.levels == 5);
}

TEST_CASE("success probability uses the stated drop probabilities") {
  const auto m = ChannelModel::make(1, 1, kPaperDrops, {{0.2, 0.2, 0.2, 0.2, 0.2}});
  SystemState s{{1}, {5}};
  CHECK(success_probability(m, 0, 0, s) == doctest::Approx(0.99));
  s.h[0] = 1;
  CHECK(success_probability(m, 0, 0, s) == doctest::Approx(0.8));
  CHECK_THROWS_AS(success_probability(m, 1, 0, s), ValidationError);

  const auto lossless = ChannelModel::make(1, 1, {0.0, 0.0}, {{0.5, 0.5}});
  SystemState s2{{1}, {2}};
  CHECK(success_probability(lossless, 0, 0, s2) == doctest::Approx(1.0));
}

TEST_CASE("degenerate level distribution always lands on its atom") {
  auto m = degenerate_top_level_model();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) CHECK(sample_channel_matrix(m, rng)[0] == 5);
}

TEST_CASE("uniform level frequencies stay within three sigma over 1e5 draws") {
  const auto m = ChannelModel::make(1, 1, kPaperDrops, {{0.2, 0.2, 0.2, 0.2, 0.2}});
  std::mt19937_64 rng(2024);
  const int n = 100000;
  std::vector<int> counts(5, 0);
  for (int i = 0; i < n; ++i) ++counts[sample_channel_matrix(m, rng)[0] - 1];
  const double sigma = std::sqrt(0.2 * 0.8 / n);
  for (int level = 0; level < 5; ++level)
    CHECK(std::abs(counts[level] / double(n) - 0.2) <= 3.0 * sigma);
}

TEST_CASE("channel sampling is deterministic under a fixed seed") {
  const auto sys = generate_random_system(3, 2, SystemGenSpec{}, 5);
  std::mt19937_64 a(77), b(77);
  for (int i = 0; i < 10; ++i)
    CHECK(sample_channel_matrix(sys.channel, a) == sample_channel_matrix(sys.channel, b));
}

TEST_CASE("action validation accepts exact assignments and rejects the rest") {
  CHECK(satisfies_assignment_constraint(ScheduleAction{{1, 0}}, 2, 1));
  CHECK(satisfies_assignment_constraint(ScheduleAction{{0, 1}}, 2, 1));
  CHECK_FALSE(satisfies_assignment_constraint(ScheduleAction{{0, 0}}, 2, 1));  // channel unused
  CHECK_FALSE(satisfies_assignment_constraint(ScheduleAction{{1, 1}}, 2, 1));  // duplicated
  CHECK_FALSE(satisfies_assignment_constraint(ScheduleAction{{2, 0}}, 2, 1));  // no such channel
  CHECK_FALSE(satisfies_assignment_constraint(ScheduleAction{{1}}, 2, 1));     // short vector
  CHECK_THROWS_AS(validate_action(ScheduleAction{{0, 0}}, 2, 1), ValidationError);
}

TEST_CASE("forced success and failure transitions follow the AoI recursion") {
  Environment::Options opts;
  opts.init_tau = std::vector<int>{2, 5};

  Environment sure(two_sensor_model(0.0), two_scalar_processes(), RewardKind::sum_mse, opts, 9);
  sure.step(ScheduleAction{{1, 0}});
  CHECK(sure.state().tau == std::vector<int>{1, 6});

  Environment never(two_sensor_model(1.0), two_scalar_processes(), RewardKind::sum_mse, opts, 9);
  never.step(ScheduleAction{{1, 0}});
  CHECK(never.state().tau == std::vector<int>{3, 6});
}

TEST_CASE("reception branches hit their probabilities within three sigma") {
  Environment::Options opts;
  opts.init_tau = std::vector<int>{2, 5};
  Environment env(two_sensor_model(0.2), two_scalar_processes(), RewardKind::sum_mse, opts, 31);
  const int n = 100000;
  int successes = 0;
  SystemState start = env.state();
  for (int i = 0; i < n; ++i) {
    env.reset_to(start);
    env.step(ScheduleAction{{1, 0}});
    if (env.state().tau[0] == 1) {
      CHECK(env.state().tau[1] == 6);
      ++successes;
    } else {
      CHECK(env.state().tau == std::vector<int>{3, 6});
    }
  }
  const double sigma = std::sqrt(0.8 * 0.2 / n);
  CHECK(std::abs(successes / double(n) - 0.8) <= 3.0 * sigma);
}

TEST_CASE("the step reward is the current state's reward, independent of the action") {
  Environment::Options opts;
  opts.init_tau = std::vector<int>{3, 4};
  Environment env(two_sensor_model(0.5), two_scalar_processes(), RewardKind::sum_mse, opts, 11);
  const SystemState start = env.state();
  const double expected = env.reward_at(start.tau);
  for (int trial = 0; trial < 8; ++trial) {
    env.reset_to(start);
    const auto r = env.step(trial % 2 ? ScheduleAction{{1, 0}} : ScheduleAction{{0, 1}});
    CHECK(r.reward == doctest::Approx(expected));
  }
}

TEST_CASE("environment steps are deterministic given seed, state, and action") {
  const auto sys = generate_random_system(2, 1, SystemGenSpec{}, 8);
  Environment a(sys.channel, sys.processes, RewardKind::sum_mse, {}, 55);
  Environment b(sys.channel, sys.processes, RewardKind::sum_mse, {}, 55);
  for (int i = 0; i < 200; ++i) {
    const auto ra = a.step(ScheduleAction{{1, 0}});
    const auto rb = b.step(ScheduleAction{{1, 0}});
    CHECK(ra.reward == rb.reward);
    CHECK(ra.received == rb.received);
    CHECK(a.state() == b.state());
  }
}

TEST_CASE("reset semantics") {
  const auto sys = generate_random_system(2, 1, SystemGenSpec{}, 8);
  Environment env(sys.channel, sys.processes, RewardKind::sum_mse, {}, 3);
  CHECK(env.state().tau == std::vector<int>{1, 1});

  Environment::Options opts;
  opts.init_tau = std::vector<int>{4, 7};
  Environment env2(sys.channel, sys.processes, RewardKind::sum_mse, opts, 3);
  CHECK(env2.state().tau == std::vector<int>{4, 7});

  Environment env3(sys.channel, sys.processes, RewardKind::sum_mse, {}, 3);
  CHECK(env3.state().h == env.state().h);  // same seed, same fading draw
}

TEST_CASE("tau clamping is honored when enabled and absent otherwise") {
  Environment::Options opts;
  opts.clamp_tau = true;
  opts.tau_max = 4;
  opts.init_tau = std::vector<int>{4, 4};
  Environment env(two_sensor_model(1.0), two_scalar_processes(), RewardKind::sum_mse, opts, 5);
  env.step(ScheduleAction{{1, 0}});
  CHECK(env.state().tau == std::vector<int>{4, 4});  // absorbing cap

  Environment::Options free_opts;
  free_opts.init_tau = std::vector<int>{4, 4};
  Environment unbounded(two_sensor_model(1.0), two_scalar_processes(), RewardKind::sum_mse,
                        free_opts, 5);
  unbounded.step(ScheduleAction{{1, 0}});
  CHECK(unbounded.state().tau == std::vector<int>{5, 5});
}

TEST_CASE("generated systems are reproducible and within spec ranges") {
  const auto a = generate_random_system(3, 2, SystemGenSpec{}, 123);
  const auto b = generate_random_system(3, 2, SystemGenSpec{}, 123);
  for (int n = 0; n < 3; ++n) {
    CHECK(a.processes[n].A == b.processes[n].A);
    CHECK(a.processes[n].C == b.processes[n].C);
  }
  CHECK(a.channel.dist == b.channel.dist);

  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto sys = generate_random_system(1, 1, SystemGenSpec{}, seed);
    const double rho = sys.processes[0].spectral_radius;
    CHECK(rho > 1.0);
    CHECK(rho < 1.4);
    double sum = 0;
    for (double q : sys.channel.q(0, 0)) sum += q;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}
