#pragma once

#include <cstdint>

#include "remsched/environment.hpp"
#include "remsched/dqn.hpp"
#include "remsched/nn.hpp"
#include "remsched/policy_eval.hpp"
#include "remsched/se_select.hpp"

namespace remsched {

/// Ranking-based decoding of a continuous actor output: the top-M sensors by
/// value take channels 1..M in rank order (ties by sensor index), the rest
/// idle. `v` is the rank-preserving renormalization: scheduled sensors get
/// evenly spaced values in (0,1] by rank, unscheduled ones evenly spaced
/// values in [-1,0) preserving the raw order.
struct VirtualMapping {
  std::vector<float> v;
  ScheduleAction action;
};
VirtualMapping map_virtual_action(const std::vector<float>& raw, int sensors, int channels);

/// Canonical virtual encoding of a concrete assignment (unscheduled sensors
/// ordered by index). map_virtual_action(virtual_of_action(a)).action == a.
std::vector<float> virtual_of_action(const ScheduleAction& action, int channels);

struct DdpgConfig {
  std::vector<int> hidden = {256, 256};
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double lr_decay = 0.001;
  double gamma = 0.95;
  double epsilon0 = 1.0;
  double xi0 = 1.0;
  double explore_decay = 0.999;
  double explore_floor = 0.01;
  int batch = 128;
  int replay_capacity = 20000;
  double delta = 0.005;  // soft target blend, every update
  double alpha1 = 0.5;
  double alpha2 = 0.9;
  double noise_sigma0 = 0.3;  // exploration noise on the raw actor output
  double noise_decay = 0.999;
  int loose_episodes = 50;
  int tight_episodes = 100;
  int conventional_episodes = 150;
  int steps_per_episode = 500;
  double tau_norm = 20.0;
  double reward_scale = 0.0;
  bool disable_channel_threshold = false;
  bool skip_loose_stage = false;
  std::uint64_t seed = 1;

  int total_episodes() const { return loose_episodes + tight_episodes + conventional_episodes; }
};

struct DdpgTransition {
  std::vector<int> tau, h;
  std::vector<int> tau2, h2;
  std::vector<float> v, vhat, vtilde;  // vhat meaningful only when se is set
  std::uint8_t se = 0;
  float r = 0;
};

template <typename T>
struct DdpgBatchT {
  typename MlpT<T>::Matrix s, s_next;        // features x B
  typename MlpT<T>::Matrix v, vhat, vtilde;  // sensors x B
  std::vector<std::uint8_t> se;
  std::vector<T> r;
  int size() const { return static_cast<int>(r.size()); }
};
using DdpgBatch = DdpgBatchT<float>;

template <typename T>
struct CriticLossResultT {
  double loss = 0;
  typename MlpT<T>::Gradients grads;
};
using CriticLossResult = CriticLossResultT<float>;

/// TD loss of the critic with the action-difference penalty on transitions
/// that executed the structure-suggested action. Bootstrap targets come from
/// the target actor and target critic.
template <typename T>
CriticLossResultT<T> se_ddpg_critic_loss(const MlpT<T>& critic, const MlpT<T>& critic_target,
                                         const MlpT<T>& actor_target, const DdpgBatchT<T>& batch,
                                         T gamma, T alpha1);

template <typename T>
struct ActorGradResultT {
  double mean_q = 0;  // mean critic value of the actor's outputs
  typename MlpT<T>::Gradients grads;  // minimization gradients
};
using ActorGradResult = ActorGradResultT<float>;

/// Deterministic policy-gradient update of the actor. On structure-executed
/// transitions the ascent objective is alpha2 * Q(s, mu(s)) minus
/// (1 - alpha2) ||v - mu(s)||^2; otherwise plain Q(s, mu(s)).
template <typename T>
ActorGradResultT<T> se_ddpg_actor_gradients(const MlpT<T>& actor, const MlpT<T>& critic,
                                            const DdpgBatchT<T>& batch, T alpha2);

struct DdpgResult {
  Mlp actor, critic;
  std::vector<EpisodeMetrics> metrics;
  long env_steps = 0;
  long actions_executed = 0;
};

DdpgResult train_se_ddpg(Environment& env, const DdpgConfig& config);

PolicyFn ddpg_policy(const Mlp& actor, int channels, int levels, double tau_norm);

}  // namespace remsched
