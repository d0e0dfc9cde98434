#include "remsched/ddpg.hpp"

#include <algorithm>
#include <numeric>

namespace remsched {

VirtualMapping map_virtual_action(const std::vector<float>& raw, int sensors, int channels) {
  if (static_cast<int>(raw.size()) != sensors)
    throw ValidationError("map_virtual_action: raw output length must equal sensor count");
  std::vector<int> order(sensors);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&raw](int a, int b) { return raw[a] > raw[b]; });  // ties by index

  VirtualMapping out;
  out.v.resize(sensors);
  out.action.a.assign(sensors, 0);
  for (int rank = 0; rank < sensors; ++rank) {
    const int n = order[rank];
    if (rank < channels) {
      out.action.a[n] = rank + 1;
      out.v[n] = static_cast<float>(channels - rank) / static_cast<float>(channels);
    } else {
      out.v[n] = -static_cast<float>(rank - channels + 1) / static_cast<float>(sensors - channels);
    }
  }
  return out;
}

std::vector<float> virtual_of_action(const ScheduleAction& action, int channels) {
  const int sensors = static_cast<int>(action.a.size());
  std::vector<float> v(sensors);
  int idle_rank = 0;
  for (int n = 0; n < sensors; ++n) {
    const int m = action.a[n];
    if (m > 0) {
      v[n] = static_cast<float>(channels - m + 1) / static_cast<float>(channels);
    } else {
      ++idle_rank;
      v[n] = -static_cast<float>(idle_rank) / static_cast<float>(sensors - channels);
    }
  }
  return v;
}

namespace {

template <typename T>
typename MlpT<T>::Matrix stack(const typename MlpT<T>::Matrix& top,
                               const typename MlpT<T>::Matrix& bottom) {
  typename MlpT<T>::Matrix out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

template <typename T>
void add_gradients(typename MlpT<T>::Gradients& into, const typename MlpT<T>::Gradients& from) {
  for (size_t l = 0; l < into.g.size(); ++l) {
    into.g[l].w += from.g[l].w;
    into.g[l].b += from.g[l].b;
  }
}

}  // namespace

template <typename T>
CriticLossResultT<T> se_ddpg_critic_loss(const MlpT<T>& critic, const MlpT<T>& critic_target,
                                         const MlpT<T>& actor_target, const DdpgBatchT<T>& batch,
                                         T gamma, T alpha1) {
  using Matrix = typename MlpT<T>::Matrix;
  const int B = batch.size();
  const T inv_b = T(1) / static_cast<T>(B);

  const Matrix u_next = actor_target.forward(batch.s_next);
  const Matrix q_next = critic_target.forward(stack<T>(batch.s_next, u_next));

  typename MlpT<T>::Cache cache_v;
  const Matrix q_v = critic.forward(stack<T>(batch.s, batch.v), &cache_v);

  bool any_se = false;
  for (auto f : batch.se) any_se |= f != 0;

  Matrix q_hat, q_tilde;
  typename MlpT<T>::Cache cache_hat, cache_tilde;
  if (any_se) {
    q_hat = critic.forward(stack<T>(batch.s, batch.vhat), &cache_hat);
    q_tilde = critic.forward(stack<T>(batch.s, batch.vtilde), &cache_tilde);
  }

  Matrix d_v = Matrix::Zero(1, B);
  Matrix d_hat, d_tilde;
  if (any_se) {
    d_hat = Matrix::Zero(1, B);
    d_tilde = Matrix::Zero(1, B);
  }

  double loss = 0;
  for (int i = 0; i < B; ++i) {
    const T y = batch.r[i] + gamma * q_next(0, i);
    const T td = y - q_v(0, i);
    if (batch.se[i]) {
      const T ad = q_hat(0, i) - q_tilde(0, i);
      loss += alpha1 * td * td + (T(1) - alpha1) * ad * ad;
      d_v(0, i) = T(-2) * alpha1 * td * inv_b;
      d_hat(0, i) = T(2) * (T(1) - alpha1) * ad * inv_b;
      d_tilde(0, i) = T(-2) * (T(1) - alpha1) * ad * inv_b;
    } else {
      loss += td * td;
      d_v(0, i) = T(-2) * td * inv_b;
    }
  }

  CriticLossResultT<T> out;
  out.loss = loss * inv_b;
  out.grads = critic.backward(cache_v, d_v);
  if (any_se) {
    add_gradients<T>(out.grads, critic.backward(cache_hat, d_hat));
    add_gradients<T>(out.grads, critic.backward(cache_tilde, d_tilde));
  }
  return out;
}

template <typename T>
ActorGradResultT<T> se_ddpg_actor_gradients(const MlpT<T>& actor, const MlpT<T>& critic,
                                            const DdpgBatchT<T>& batch, T alpha2) {
  using Matrix = typename MlpT<T>::Matrix;
  const int B = batch.size();
  const int N = static_cast<int>(batch.v.rows());
  const T inv_b = T(1) / static_cast<T>(B);

  typename MlpT<T>::Cache cache_actor;
  const Matrix u = actor.forward(batch.s, &cache_actor);

  typename MlpT<T>::Cache cache_critic;
  Matrix dq_dx;
  const Matrix q = critic.forward(stack<T>(batch.s, u), &cache_critic);

  // dQ/d(input) per column, weighted per-sample so one backward pass yields
  // the batch-mean objective gradient.
  Matrix weights(1, B);
  for (int i = 0; i < B; ++i) weights(0, i) = (batch.se[i] ? alpha2 : T(1)) * inv_b;
  critic.backward(cache_critic, weights, &dq_dx);

  Matrix ascent = dq_dx.bottomRows(N);
  for (int i = 0; i < B; ++i)
    if (batch.se[i])
      ascent.col(i) += T(2) * (T(1) - alpha2) * inv_b * (batch.v.col(i) - u.col(i));

  ActorGradResultT<T> out;
  out.mean_q = q.row(0).mean();
  out.grads = actor.backward(cache_actor, (-ascent).eval());
  return out;
}

template CriticLossResultT<float> se_ddpg_critic_loss(const MlpT<float>&, const MlpT<float>&,
                                                      const MlpT<float>&,
                                                      const DdpgBatchT<float>&, float, float);
template CriticLossResultT<double> se_ddpg_critic_loss(const MlpT<double>&, const MlpT<double>&,
                                                       const MlpT<double>&,
                                                       const DdpgBatchT<double>&, double, double);
template ActorGradResultT<float> se_ddpg_actor_gradients(const MlpT<float>&, const MlpT<float>&,
                                                         const DdpgBatchT<float>&, float);
template ActorGradResultT<double> se_ddpg_actor_gradients(const MlpT<double>&,
                                                          const MlpT<double>&,
                                                          const DdpgBatchT<double>&, double);

PolicyFn ddpg_policy(const Mlp& actor, int channels, int levels, double tau_norm) {
  const int sensors = actor.output_dim();
  return [&actor, channels, levels, tau_norm, sensors](const SystemState& s) {
    Eigen::MatrixXf x(feature_dim(sensors, channels), 1);
    featurize(s, channels, levels, tau_norm, x.data());
    const Eigen::MatrixXf u = actor.forward(x);
    std::vector<float> raw(u.data(), u.data() + sensors);
    return map_virtual_action(raw, sensors, channels).action;
  };
}

DdpgResult train_se_ddpg(Environment& env, const DdpgConfig& config) {
  const int N = env.sensors(), M = env.channels();
  const int F = feature_dim(N, M);

  std::mt19937_64 master(config.seed);
  std::mt19937_64 init_rng(master());
  std::mt19937_64 agent_rng(master());

  std::vector<int> actor_dims{F};
  actor_dims.insert(actor_dims.end(), config.hidden.begin(), config.hidden.end());
  actor_dims.push_back(N);
  Mlp actor = Mlp::random(actor_dims, Mlp::Output::tanh, init_rng);

  std::vector<int> critic_dims{F + N};
  critic_dims.insert(critic_dims.end(), config.hidden.begin(), config.hidden.end());
  critic_dims.push_back(1);
  Mlp critic = Mlp::random(critic_dims, Mlp::Output::linear, init_rng);

  Mlp actor_target = actor, critic_target = critic;
  Adam opt_actor(actor), opt_critic(critic);

  double scale = config.reward_scale;
  if (scale <= 0) {
    scale = 0;
    for (const auto& table : env.mse_tables()) scale += table.at(1);
  }

  ReplayBuffer<DdpgTransition> replay(config.replay_capacity);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const auto actor_raw = [&](const SystemState& s) {
    Eigen::MatrixXf x(F, 1);
    featurize(s, M, env.channel().levels, config.tau_norm, x.data());
    const Eigen::MatrixXf u = actor.forward(x);
    return std::vector<float>(u.data(), u.data() + N);
  };

  DdpgResult result;
  double eps = config.epsilon0, xi = config.xi0, sigma = config.noise_sigma0;
  DdpgBatch batch;
  batch.s.resize(F, config.batch);
  batch.s_next.resize(F, config.batch);
  batch.v.resize(N, config.batch);
  batch.vhat.resize(N, config.batch);
  batch.vtilde.resize(N, config.batch);
  batch.se.resize(config.batch);
  batch.r.resize(config.batch);

  for (int episode = 0; episode < config.total_episodes(); ++episode) {
    TrainStage stage;
    if (episode < config.loose_episodes)
      stage = config.skip_loose_stage ? TrainStage::tight : TrainStage::loose;
    else if (episode < config.loose_episodes + config.tight_episodes)
      stage = TrainStage::tight;
    else
      stage = TrainStage::conventional;
    const float lr_a = static_cast<float>(config.actor_lr / (1.0 + config.lr_decay * episode));
    const float lr_c = static_cast<float>(config.critic_lr / (1.0 + config.lr_decay * episode));

    env.reset();
    double mse_acc = 0, aoi_acc = 0, loss_acc = 0;
    long updates = 0;

    for (int t = 0; t < config.steps_per_episode; ++t) {
      const SystemState s = env.state();
      mse_acc += env.sum_mse(s.tau);
      for (int tau : s.tau) aoi_acc += tau;

      const std::vector<float> u_raw = actor_raw(s);
      const VirtualMapping greedy = map_virtual_action(u_raw, N, M);

      auto noisy_pick = [&]() {
        std::vector<float> pert(N);
        for (int n = 0; n < N; ++n)
          pert[n] = u_raw[n] + static_cast<float>(sigma * gauss(agent_rng));
        return map_virtual_action(pert, N, M);
      };

      ScheduleAction a;
      std::vector<float> v, vhat;
      std::uint8_t se_flag = 0;
      if (stage == TrainStage::conventional) {
        const VirtualMapping pick = noisy_pick();
        a = pick.action;
        v = pick.v;
      } else if (unit(agent_rng) < eps) {
        const VirtualMapping pick = noisy_pick();
        a = pick.action;
        v = pick.v;
      } else {
        SeParams params;
        params.xi = xi;
        params.tight = stage == TrainStage::tight;
        params.disable_channel_threshold = config.disable_channel_threshold;
        const auto probe = [&](const SystemState& st) {
          return map_virtual_action(actor_raw(st), N, M).action;
        };
        const auto se = se_infer(s, env.channel(), probe, greedy.action, params, agent_rng);
        if (se) {
          a = *se;
          v = virtual_of_action(a, M);
          vhat = v;
          se_flag = 1;
        } else {
          a = greedy.action;
          v = greedy.v;
        }
      }

      const auto step = env.step(a);
      const SystemState& s2 = env.state();
      DdpgTransition tr;
      tr.tau = s.tau;
      tr.h = s.h;
      tr.tau2 = s2.tau;
      tr.h2 = s2.h;
      tr.v = std::move(v);
      tr.vhat = se_flag ? vhat : std::vector<float>(N, 0.0f);
      tr.vtilde = u_raw;  // raw actor output, per the stored-transition contract
      tr.se = se_flag;
      tr.r = static_cast<float>(step.reward / scale);
      replay.push(std::move(tr));

      eps = std::max(config.explore_floor, eps * config.explore_decay);
      xi = std::max(config.explore_floor, xi * config.explore_decay);
      sigma *= config.noise_decay;

      if (replay.size() >= static_cast<size_t>(config.batch)) {
        const auto picks = replay.sample_indices(config.batch, agent_rng);
        for (int i = 0; i < config.batch; ++i) {
          const DdpgTransition& rt = replay[picks[i]];
          featurize(SystemState{rt.tau, rt.h}, M, env.channel().levels, config.tau_norm,
                    batch.s.col(i).data());
          featurize(SystemState{rt.tau2, rt.h2}, M, env.channel().levels, config.tau_norm,
                    batch.s_next.col(i).data());
          for (int n = 0; n < N; ++n) {
            batch.v(n, i) = rt.v[n];
            batch.vhat(n, i) = rt.vhat[n];
            batch.vtilde(n, i) = rt.vtilde[n];
          }
          batch.se[i] = rt.se;
          batch.r[i] = rt.r;
        }
        const auto closs = se_ddpg_critic_loss(critic, critic_target, actor_target, batch,
                                               static_cast<float>(config.gamma),
                                               static_cast<float>(config.alpha1));
        opt_critic.step(critic, closs.grads, lr_c);
        const auto ag = se_ddpg_actor_gradients(actor, critic, batch,
                                                static_cast<float>(config.alpha2));
        opt_actor.step(actor, ag.grads, lr_a);
        sync_target(critic_target, critic, SyncMode::soft, static_cast<float>(config.delta));
        sync_target(actor_target, actor, SyncMode::soft, static_cast<float>(config.delta));
        loss_acc += closs.loss;
        ++updates;
      }
      ++result.env_steps;
    }

    EpisodeMetrics em;
    em.episode = episode;
    em.stage = static_cast<int>(stage);
    em.avg_sum_mse = mse_acc / config.steps_per_episode;
    em.avg_sum_aoi = aoi_acc / config.steps_per_episode;
    em.epsilon = eps;
    em.xi = xi;
    em.mean_loss = updates ? loss_acc / updates : 0.0;
    result.metrics.push_back(em);
  }

  result.actions_executed = env.actions_validated();
  result.actor = std::move(actor);
  result.critic = std::move(critic);
  return result;
}

}  // namespace remsched
