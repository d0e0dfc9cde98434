#include "remsched/environment.hpp"

namespace remsched {

Environment::Environment(ChannelModel channel, std::vector<ProcessModel> processes,
                         RewardKind reward_kind, Options options, std::uint64_t seed)
    : channel_(std::move(channel)),
      processes_(std::move(processes)),
      reward_kind_(reward_kind),
      options_(std::move(options)),
      rng_(seed) {
  if (processes_.size() != static_cast<size_t>(channel_.sensors))
    throw ValidationError("environment needs one process per sensor");
  if (options_.clamp_tau && options_.tau_max < 2)
    throw ValidationError("tau_max must be >= 2 when clamping");
  int table_len = options_.mse_table_len;
  if (options_.clamp_tau && table_len < options_.tau_max) table_len = options_.tau_max;
  tables_.reserve(processes_.size());
  for (const auto& p : processes_) tables_.emplace_back(p, table_len);
  if (options_.init_tau) {
    if (options_.init_tau->size() != processes_.size())
      throw ValidationError("init_tau length does not match sensor count");
    for (int t : *options_.init_tau)
      if (t < 1) throw ValidationError("init_tau entries must be >= 1");
  }
  reset();
}

const SystemState& Environment::reset() {
  state_.tau = options_.init_tau ? *options_.init_tau
                                 : std::vector<int>(channel_.sensors, 1);
  state_.h = sample_channel_matrix(channel_, rng_);
  return state_;
}

const SystemState& Environment::reset_to(const SystemState& state) {
  if (state.tau.size() != static_cast<size_t>(channel_.sensors) ||
      state.h.size() != static_cast<size_t>(channel_.sensors) * channel_.channels)
    throw ValidationError("reset_to: state dimensions do not match the model");
  state_ = state;
  return state_;
}

Environment::StepResult Environment::step(const ScheduleAction& action) {
  validate_action(action, channel_.sensors, channel_.channels);
  ++validated_;

  StepResult result;
  result.reward = reward_at(state_.tau);  // reward precedes the transition
  result.received.assign(channel_.sensors, 0);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 0; n < channel_.sensors; ++n) {
    const int m = action.a[n];
    bool received = false;
    if (m > 0) {
      const double p = success_probability(channel_, n, m - 1, state_);
      received = unit(rng_) < p;
    }
    result.received[n] = received ? 1 : 0;
    int next = received ? 1 : state_.tau[n] + 1;
    if (options_.clamp_tau && next > options_.tau_max) next = options_.tau_max;
    state_.tau[n] = next;
  }
  state_.h = sample_channel_matrix(channel_, rng_);
  ++steps_;
  return result;
}

double Environment::reward_at(const std::vector<int>& tau) const {
  return reward(tables_, tau, reward_kind_);
}

double Environment::sum_mse(const std::vector<int>& tau) const {
  double sum = 0;
  for (size_t n = 0; n < tables_.size(); ++n) sum += tables_[n].at(tau[n]);
  return sum;
}

}  // namespace remsched
