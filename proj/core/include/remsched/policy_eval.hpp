#pragma once

#include <functional>

#include "remsched/environment.hpp"
#include "remsched/mdp_solver.hpp"

namespace remsched {

using PolicyFn = std::function<ScheduleAction(const SystemState&)>;

struct EvalOptions {
  long steps = 10000;
  double mse_limit = 1e6;   // running-average blow-up threshold
  long tau_limit = 10000;   // any AoI beyond this marks divergence
  bool record_trace = true;
};

struct EvalResult {
  double avg_sum_mse = 0;
  double avg_sum_aoi = 0;
  bool diverged = false;
  long steps_run = 0;
  std::vector<double> step_sum_mse;  // per-step trace when recorded
  std::vector<double> step_sum_aoi;
};

/// Rolls the environment forward under the policy, averaging the per-step sum
/// of process MSE traces and the sum AoI. The policy's action is validated by
/// the environment on every step. Divergence (per EvalOptions) aborts early
/// and flags the result.
EvalResult evaluate_policy(Environment& env, const PolicyFn& policy, const EvalOptions& options);

/// Greedy table-lookup policy of a solved MDP; AoI components above tau_max
/// fall back to the capped state's action.
PolicyFn table_policy(const SolvedMdp& solved);

}  // namespace remsched
