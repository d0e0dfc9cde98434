#include <cmath>

#include "doctest.h"
#include "remsched/process_model.hpp"
#include "remsched/system_gen.hpp"

using namespace remsched;

namespace {

Eigen::MatrixXd scalar(double x) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = x;
  return m;
}

// Closed-form steady state of the scalar system a=1.2, c=1, w=1, v=1: the
// prior covariance solves S^2 = a^2 S + w, and the posterior is S v/(S + v).
struct ScalarOracle {
  double a = 1.2, w = 1.0, v = 1.0;
  double prior() const {
    const double a2 = a * a;
    return (a2 + std::sqrt(a2 * a2 + 4.0 * w)) / 2.0;
  }
  double posterior() const {
    const double s = prior();
    return s * v / (s + v);
  }
};

}  // namespace

TEST_CASE("steady-state covariance matches the scalar Riccati fixed point") {
  const ScalarOracle oracle;
  const Eigen::MatrixXd pbar =
      steady_state_covariance(scalar(1.2), scalar(1.0), scalar(1.0), scalar(1.0));
  CHECK(pbar(0, 0) == doctest::Approx(oracle.posterior()).epsilon(1e-9));
  CHECK(pbar(0, 0) == doctest::Approx(0.6612734).epsilon(1e-6));
}

TEST_CASE("perfect measurements drive the posterior covariance to zero") {
  const Eigen::MatrixXd pbar =
      steady_state_covariance(scalar(1.2), scalar(1.0), scalar(1.0), scalar(1e-12));
  CHECK(pbar(0, 0) < 1e-9);
}

TEST_CASE("one holding step from the posterior reproduces the prior covariance") {
  const ScalarOracle oracle;
  const auto p = ProcessModel::make(scalar(1.2), scalar(1.0), scalar(1.0), scalar(1.0));
  const Eigen::MatrixXd prior = p.hold(p.Pbar);
  CHECK(prior(0, 0) == doctest::Approx(oracle.prior()).epsilon(1e-9));
}

TEST_CASE("process construction validates inputs") {
  CHECK_THROWS_AS(ProcessModel::make(scalar(0.9), scalar(1.0), scalar(1.0), scalar(1.0)),
                  ValidationError);  // stable system out of contract
  CHECK_THROWS_AS(ProcessModel::make(scalar(1.2), scalar(1.0), scalar(-1.0), scalar(1.0)),
                  ValidationError);  // non-SPD W
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 2, 3, 4;
  CHECK_THROWS_AS(
      ProcessModel::make(Eigen::MatrixXd::Identity(2, 2) * 1.2, Eigen::MatrixXd::Ones(1, 2), asym,
                         scalar(1.0)),
      ValidationError);
  CHECK_THROWS_AS(
      steady_state_covariance(scalar(1.2), scalar(1.0), scalar(1.0), scalar(1.0), 1e-10, 2),
      ConvergenceError);
}

TEST_CASE("kalman cycle residual at the fixed point is tiny") {
  const auto p = ProcessModel::make(scalar(1.2), scalar(1.0), scalar(1.0), scalar(1.0));
  CHECK(p.kalman_cycle_residual() < 1e-10);
}

TEST_CASE("MSE table follows the hand recursion and is strictly increasing") {
  const ScalarOracle oracle;
  const auto p = ProcessModel::make(scalar(1.2), scalar(1.0), scalar(1.0), scalar(1.0));
  const MseTable table(p, 16);
  const double t1 = oracle.prior();
  CHECK(aoi_error_trace(table, 1) == doctest::Approx(t1).epsilon(1e-9));
  CHECK(aoi_error_trace(table, 2) == doctest::Approx(1.44 * t1 + 1.0).epsilon(1e-9));
  for (int age = 2; age <= 16; ++age) CHECK(table.at(age) > table.at(age - 1));
  CHECK(table.at(1) == doctest::Approx((p.A * p.Pbar * p.A.transpose() + p.W).trace()));
}

TEST_CASE("MSE table clamps above its range and rejects ages below one") {
  const auto p = ProcessModel::make(scalar(1.2), scalar(1.0), scalar(1.0), scalar(1.0));
  const MseTable table(p, 4);
  CHECK_THROWS_AS(table.at(0), ValidationError);
  CHECK(table.clamped_lookups() == 0);
  CHECK(table.at(9) == table.at(4));
  CHECK(table.clamped_lookups() == 1);
}

TEST_CASE("rewards match hand arithmetic for all kinds") {
  const ScalarOracle oracle;
  const auto p = ProcessModel::make(scalar(1.2), scalar(1.0), scalar(1.0), scalar(1.0));
  std::vector<MseTable> tables;
  tables.emplace_back(p, 8);
  tables.emplace_back(p, 8);
  const double t1 = oracle.prior();
  const double t2 = 1.44 * t1 + 1.0;

  CHECK(reward(tables, {1, 1}, RewardKind::sum_mse) == doctest::Approx(-2.0 * t1).epsilon(1e-9));
  CHECK(reward(tables, {1, 1}, RewardKind::sum_mse) == doctest::Approx(-3.9044675).epsilon(1e-6));
  CHECK(reward(tables, {1, 1}, RewardKind::sum_aoi) == doctest::Approx(-2.0));
  CHECK(reward(tables, {1, 2}, RewardKind::product_mse) ==
        doctest::Approx(-t1 * t2).epsilon(1e-9));
  CHECK(reward(tables, {1, 2}, RewardKind::product_mse) == doctest::Approx(-7.4403856).epsilon(1e-4));

  CHECK_THROWS_AS(reward(tables, {0, 1}, RewardKind::sum_mse), ValidationError);
  CHECK_THROWS_AS(reward(tables, {1}, RewardKind::sum_mse), ValidationError);
}

TEST_CASE("rewards strictly decrease when any single AoI grows") {
  const auto sys = generate_random_system(3, 2, SystemGenSpec{}, 99);
  std::vector<MseTable> tables;
  for (const auto& p : sys.processes) tables.emplace_back(p, 12);
  for (const auto kind : {RewardKind::sum_mse, RewardKind::sum_aoi, RewardKind::product_mse}) {
    std::vector<int> tau{2, 5, 3};
    const double base = reward(tables, tau, kind);
    for (size_t n = 0; n < tau.size(); ++n) {
      auto bumped = tau;
      ++bumped[n];
      CHECK(reward(tables, bumped, kind) < base);
    }
  }
}

TEST_CASE("generated processes satisfy the fixed-point residual bound") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto sys = generate_random_system(2, 1, SystemGenSpec{}, seed);
    for (const auto& p : sys.processes) {
      CHECK(p.relative_cycle_residual() < 1e-10);
      CHECK(p.spectral_radius > 1.0);
      CHECK(p.spectral_radius < 1.4);
    }
  }
}
