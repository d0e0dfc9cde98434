#pragma once

#include <utility>
#include <vector>

#include "remsched/process_model.hpp"
#include "remsched/state_space.hpp"

namespace remsched {

/// AoI half of the transition kernel: the explicit successor distribution of
/// the AoI vector given state, action, and the current channel matrix. The
/// fading half factors out as Pr(H+) independent of (s, a); see
/// MdpModel::h_distribution. AoI at tau_max is absorbing on failure.
std::vector<std::pair<std::vector<int>, double>> aoi_transitions(const SystemState& state,
                                                                 const ScheduleAction& action,
                                                                 const ChannelModel& model,
                                                                 int tau_max);

struct ValueTable {
  std::vector<double> v;
  double gamma = 0;
  double tol = 0;
  double residual = 0;  // final sup-norm sweep change
  long sweeps = 0;
};

struct QTable {
  std::vector<double> q;  // state-major
  int n_actions = 0;
  double at(long s, int a) const { return q[s * n_actions + a]; }
  double& at(long s, int a) { return q[s * n_actions + a]; }
};

struct Policy {
  std::vector<int> action;  // argmax index per state, lowest index on ties
};

struct ViOptions {
  double gamma = 0.95;
  double tol = 1e-8;
  long max_iter = 100000;
};

/// The truncated finite MDP: enumeration, rewards per AoI index, the fading
/// distribution per channel index, and success probabilities. Read-only after
/// construction.
class MdpModel {
 public:
  MdpModel(StateSpace space, ChannelModel channel, std::vector<ProcessModel> processes,
           RewardKind reward_kind);

  const StateSpace& space() const { return space_; }
  const ChannelModel& channel() const { return channel_; }
  const std::vector<ProcessModel>& processes() const { return processes_; }
  const std::vector<MseTable>& mse_tables() const { return tables_; }
  RewardKind reward_kind() const { return reward_kind_; }
  const std::vector<ScheduleAction>& actions() const { return actions_; }

  double reward_of_tau(long tau_index) const { return tau_reward_[tau_index]; }
  /// Pr(H+ = decode_h(i)); independent of state and action.
  const std::vector<double>& h_distribution() const { return h_dist_; }
  double success_at(int sensor, int channel, int level) const {
    return channel_.success_at_level(level);
  }

 private:
  StateSpace space_;
  ChannelModel channel_;
  std::vector<ProcessModel> processes_;
  std::vector<MseTable> tables_;
  RewardKind reward_kind_;
  std::vector<ScheduleAction> actions_;
  std::vector<double> tau_reward_;
  std::vector<double> h_dist_;
};

/// Fixed-point sweep solver. Each sweep first marginalizes the value table
/// over the fading distribution (one pass), so the per-state maximization only
/// enumerates AoI branches. Throws ConvergenceError when max_iter sweeps do
/// not reach tol.
ValueTable value_iteration(const MdpModel& model, const ViOptions& options);

QTable q_from_value(const MdpModel& model, const ValueTable& table);

Policy greedy_policy(const QTable& q);

/// A solved instance with everything structure checks need. `optimal` is the
/// tie-aware test: Q(s,a) within slack of V(s).
struct SolvedMdp {
  MdpModel model;
  ValueTable value;
  QTable q;
  Policy policy;

  double default_slack() const { return 10.0 * value.tol; }
  bool optimal(long s, int a, double slack) const {
    return q.at(s, a) >= value.v[s] - slack;
  }
  std::vector<int> optimal_actions(long s, double slack) const;
};

SolvedMdp solve_mdp(MdpModel model, const ViOptions& options);

}  // namespace remsched
