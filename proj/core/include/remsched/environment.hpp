#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "remsched/channel_model.hpp"
#include "remsched/process_model.hpp"

namespace remsched {

/// Generative form of the scheduling MDP. One instance owns one RNG stream and
/// is single-threaded; run several instances with distinct seeds for parallel
/// rollouts.
///
/// Draw order per step is fixed: one uniform per scheduled sensor in ascending
/// sensor order (reception), then one draw per (sensor, channel) pair in
/// row-major order (fresh fading states). Reset draws only the fading states.
class Environment {
 public:
  struct Options {
    bool clamp_tau = false;      // cap AoI at tau_max (exact-MDP parity runs)
    int tau_max = 16;            // cap used when clamp_tau is set
    int mse_table_len = 64;      // precomputed reward table length
    std::optional<std::vector<int>> init_tau;  // reset AoI; all-ones by default
  };

  Environment(ChannelModel channel, std::vector<ProcessModel> processes, RewardKind reward_kind,
              Options options, std::uint64_t seed);

  struct StepResult {
    double reward = 0;                  // r of the state the action was taken in
    std::vector<std::uint8_t> received; // per-sensor reception indicator
  };

  const SystemState& reset();
  const SystemState& reset_to(const SystemState& state);
  StepResult step(const ScheduleAction& action);

  const SystemState& state() const { return state_; }
  const ChannelModel& channel() const { return channel_; }
  const std::vector<ProcessModel>& processes() const { return processes_; }
  const std::vector<MseTable>& mse_tables() const { return tables_; }
  RewardKind reward_kind() const { return reward_kind_; }
  int sensors() const { return channel_.sensors; }
  int channels() const { return channel_.channels; }
  const Options& options() const { return options_; }

  /// Reward of an arbitrary AoI vector under this environment's reward kind.
  double reward_at(const std::vector<int>& tau) const;
  /// Sum of per-process MSE traces at an AoI vector (metric, reward-agnostic).
  double sum_mse(const std::vector<int>& tau) const;

  long steps_taken() const { return steps_; }
  long actions_validated() const { return validated_; }

 private:
  ChannelModel channel_;
  std::vector<ProcessModel> processes_;
  std::vector<MseTable> tables_;
  RewardKind reward_kind_;
  Options options_;
  std::mt19937_64 rng_;
  SystemState state_;
  long steps_ = 0;
  long validated_ = 0;
};

}  // namespace remsched
