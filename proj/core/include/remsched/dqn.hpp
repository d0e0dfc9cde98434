#pragma once

#include <cstdint>

#include "remsched/environment.hpp"
#include "remsched/nn.hpp"
#include "remsched/policy_eval.hpp"
#include "remsched/se_select.hpp"

namespace remsched {

/// Training stages: structure-guided selection (loose, then with the channel
/// check) followed by conventional epsilon-greedy learning. Zero-length
/// structure stages yield the vanilla agent.
enum class TrainStage { loose = 0, tight = 1, conventional = 2 };

struct DqnConfig {
  std::vector<int> hidden = {256, 256};
  double lr = 1e-4;
  double lr_decay = 0.001;  // lr_e = lr / (1 + lr_decay * episode)
  double gamma = 0.95;
  double epsilon0 = 1.0;
  double xi0 = 1.0;
  double explore_decay = 0.999;  // per environment step
  double explore_floor = 0.01;
  int batch = 128;
  int replay_capacity = 20000;
  int target_period = 100;  // environment steps between hard target syncs
  double alpha1 = 0.5;
  int loose_episodes = 50;
  int tight_episodes = 100;
  int conventional_episodes = 150;
  int steps_per_episode = 500;
  double tau_norm = 20.0;
  double reward_scale = 0.0;  // <= 0: sum of one-step MSE traces
  bool disable_channel_threshold = false;
  bool skip_loose_stage = false;
  long action_cap = 4096;
  std::uint64_t seed = 1;

  int total_episodes() const { return loose_episodes + tight_episodes + conventional_episodes; }
};

struct EpisodeMetrics {
  int episode = 0;
  int stage = 0;
  double avg_sum_mse = 0;
  double avg_sum_aoi = 0;
  double epsilon = 0;  // value at episode end
  double xi = 0;
  double mean_loss = 0;  // mean over updates in the episode
};

struct DqnTransition {
  std::vector<int> tau, h;
  std::vector<int> tau2, h2;
  int a = -1;
  int hat = -1;  // -1 when the structure-suggested action was not executed
  int tilde = -1;
  float r = 0;
};

template <typename T>
struct DqnBatchT {
  typename MlpT<T>::Matrix s, s_next;  // features x B
  std::vector<int> a, hat, tilde;
  std::vector<T> r;
  int size() const { return static_cast<int>(a.size()); }
};
using DqnBatch = DqnBatchT<float>;

template <typename T>
struct DqnLossResultT {
  double loss = 0;
  typename MlpT<T>::Gradients grads;
};
using DqnLossResult = DqnLossResultT<float>;

/// TD loss with the action-difference penalty on transitions that executed the
/// structure-suggested action; plain TD loss otherwise. Targets come from the
/// target network and are treated as constants.
template <typename T>
DqnLossResultT<T> se_dqn_loss(const MlpT<T>& qnet, const MlpT<T>& target,
                              const DqnBatchT<T>& batch, T gamma, T alpha1);

struct DqnResult {
  Mlp qnet;
  std::vector<EpisodeMetrics> metrics;
  long env_steps = 0;
  long actions_executed = 0;  // all validated by the environment
};

DqnResult train_se_dqn(Environment& env, const DqnConfig& config);

/// Greedy policy of a trained value network. AoI components beyond the
/// featurization range are passed through as-is (the input scaling is linear).
PolicyFn dqn_policy(const Mlp& qnet, std::vector<ScheduleAction> actions, int channels,
                    int levels, double tau_norm);

}  // namespace remsched
