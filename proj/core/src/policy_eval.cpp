#include "remsched/policy_eval.hpp"

namespace remsched {

EvalResult evaluate_policy(Environment& env, const PolicyFn& policy, const EvalOptions& options) {
  EvalResult result;
  if (options.record_trace) {
    result.step_sum_mse.reserve(options.steps);
    result.step_sum_aoi.reserve(options.steps);
  }
  double mse_acc = 0, aoi_acc = 0;
  for (long t = 0; t < options.steps; ++t) {
    const SystemState& s = env.state();
    const double mse = env.sum_mse(s.tau);
    double aoi = 0;
    for (int tau : s.tau) aoi += tau;
    mse_acc += mse;
    aoi_acc += aoi;
    if (options.record_trace) {
      result.step_sum_mse.push_back(mse);
      result.step_sum_aoi.push_back(aoi);
    }
    ++result.steps_run;
    if (mse_acc / result.steps_run > options.mse_limit ||
        *std::max_element(s.tau.begin(), s.tau.end()) > options.tau_limit) {
      result.diverged = true;
      break;
    }
    env.step(policy(s));
  }
  result.avg_sum_mse = mse_acc / result.steps_run;
  result.avg_sum_aoi = aoi_acc / result.steps_run;
  return result;
}

PolicyFn table_policy(const SolvedMdp& solved) {
  return [&solved](const SystemState& s) {
    const long idx = solved.model.space().encode_clamped(s);
    return solved.model.actions()[solved.policy.action[idx]];
  };
}

}  // namespace remsched
