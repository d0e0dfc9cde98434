#include "remsched/dqn.hpp"

#include "remsched/state_space.hpp"

namespace remsched {

namespace {

int argmax_col(const Eigen::Ref<const Eigen::VectorXf>& col) {
  int best = 0;
  for (int i = 1; i < col.size(); ++i)
    if (col[i] > col[best]) best = i;  // ties keep the lowest index
  return best;
}

int find_action_index(const std::vector<ScheduleAction>& actions, const ScheduleAction& a) {
  for (size_t i = 0; i < actions.size(); ++i)
    if (actions[i] == a) return static_cast<int>(i);
  throw ValidationError("action is not in the enumerated action list");
}

}  // namespace

template <typename T>
DqnLossResultT<T> se_dqn_loss(const MlpT<T>& qnet, const MlpT<T>& target,
                              const DqnBatchT<T>& batch, T gamma, T alpha1) {
  using Matrix = typename MlpT<T>::Matrix;
  const int B = batch.size();
  if (batch.s.cols() != B || batch.s_next.cols() != B)
    throw ValidationError("se_dqn_loss: batch shape mismatch");

  typename MlpT<T>::Cache cache;
  const Matrix q = qnet.forward(batch.s, &cache);
  const Matrix q_next = target.forward(batch.s_next);

  Matrix dq = Matrix::Zero(q.rows(), q.cols());
  const T inv_b = T(1) / static_cast<T>(B);
  double loss = 0;
  for (int i = 0; i < B; ++i) {
    const T y = batch.r[i] + gamma * q_next.col(i).maxCoeff();
    const T td = y - q(batch.a[i], i);
    if (batch.hat[i] >= 0 && batch.hat[i] == batch.a[i]) {
      const T ad = q(batch.hat[i], i) - q(batch.tilde[i], i);
      loss += alpha1 * td * td + (T(1) - alpha1) * ad * ad;
      dq(batch.a[i], i) += T(-2) * alpha1 * td * inv_b;
      dq(batch.hat[i], i) += T(2) * (T(1) - alpha1) * ad * inv_b;
      dq(batch.tilde[i], i) += T(-2) * (T(1) - alpha1) * ad * inv_b;
    } else {
      loss += td * td;
      dq(batch.a[i], i) += T(-2) * td * inv_b;
    }
  }

  DqnLossResultT<T> out;
  out.loss = loss * inv_b;
  out.grads = qnet.backward(cache, dq);
  return out;
}

template DqnLossResultT<float> se_dqn_loss(const MlpT<float>&, const MlpT<float>&,
                                           const DqnBatchT<float>&, float, float);
template DqnLossResultT<double> se_dqn_loss(const MlpT<double>&, const MlpT<double>&,
                                            const DqnBatchT<double>&, double, double);

PolicyFn dqn_policy(const Mlp& qnet, std::vector<ScheduleAction> actions, int channels,
                    int levels, double tau_norm) {
  const int sensors = static_cast<int>(actions.front().a.size());
  return [&qnet, actions = std::move(actions), channels, levels, tau_norm,
          sensors](const SystemState& s) {
    Eigen::MatrixXf x(feature_dim(sensors, channels), 1);
    featurize(s, channels, levels, tau_norm, x.data());
    const Eigen::MatrixXf q = qnet.forward(x);
    return actions[argmax_col(q.col(0))];
  };
}

DqnResult train_se_dqn(Environment& env, const DqnConfig& config) {
  const int N = env.sensors(), M = env.channels();
  const int F = feature_dim(N, M);
  const auto actions = enumerate_actions(N, M, config.action_cap);
  const int A = static_cast<int>(actions.size());

  std::mt19937_64 master(config.seed);
  std::mt19937_64 init_rng(master());
  std::mt19937_64 agent_rng(master());

  std::vector<int> dims;
  dims.push_back(F);
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(A);
  Mlp qnet = Mlp::random(dims, Mlp::Output::linear, init_rng);
  Mlp target = qnet;
  Adam opt(qnet);

  double scale = config.reward_scale;
  if (scale <= 0) {
    scale = 0;
    for (const auto& table : env.mse_tables()) scale += table.at(1);
  }

  ReplayBuffer<DqnTransition> replay(config.replay_capacity);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> action_pick(0, A - 1);

  const auto probe = [&](const SystemState& s) {
    Eigen::MatrixXf x(F, 1);
    featurize(s, M, env.channel().levels, config.tau_norm, x.data());
    return actions[argmax_col(qnet.forward(x).col(0))];
  };

  DqnResult result;
  double eps = config.epsilon0, xi = config.xi0;
  Eigen::MatrixXf x(F, 1);
  DqnBatch batch;
  batch.s.resize(F, config.batch);
  batch.s_next.resize(F, config.batch);
  batch.a.resize(config.batch);
  batch.hat.resize(config.batch);
  batch.tilde.resize(config.batch);
  batch.r.resize(config.batch);

  for (int episode = 0; episode < config.total_episodes(); ++episode) {
    TrainStage stage;
    if (episode < config.loose_episodes)
      stage = config.skip_loose_stage ? TrainStage::tight : TrainStage::loose;
    else if (episode < config.loose_episodes + config.tight_episodes)
      stage = TrainStage::tight;
    else
      stage = TrainStage::conventional;
    const float lr = static_cast<float>(config.lr / (1.0 + config.lr_decay * episode));

    env.reset();
    double mse_acc = 0, aoi_acc = 0, loss_acc = 0;
    long updates = 0;

    for (int t = 0; t < config.steps_per_episode; ++t) {
      const SystemState s = env.state();
      mse_acc += env.sum_mse(s.tau);
      for (int tau : s.tau) aoi_acc += tau;

      featurize(s, M, env.channel().levels, config.tau_norm, x.data());
      const int tilde = argmax_col(qnet.forward(x).col(0));

      int a_idx, hat_idx = -1;
      if (unit(agent_rng) < eps) {
        a_idx = action_pick(agent_rng);
      } else if (stage == TrainStage::conventional) {
        a_idx = tilde;
      } else {
        SeParams params;
        params.xi = xi;
        params.tight = stage == TrainStage::tight;
        params.disable_channel_threshold = config.disable_channel_threshold;
        const auto se = se_infer(s, env.channel(), probe, actions[tilde], params, agent_rng);
        if (se) {
          a_idx = find_action_index(actions, *se);
          hat_idx = a_idx;
        } else {
          a_idx = tilde;
        }
      }

      const auto step = env.step(actions[a_idx]);
      const SystemState& s2 = env.state();
      replay.push(DqnTransition{s.tau, s.h, s2.tau, s2.h, a_idx, hat_idx, tilde,
                                static_cast<float>(step.reward / scale)});

      eps = std::max(config.explore_floor, eps * config.explore_decay);
      xi = std::max(config.explore_floor, xi * config.explore_decay);

      if (replay.size() >= static_cast<size_t>(config.batch)) {
        const auto picks = replay.sample_indices(config.batch, agent_rng);
        for (int i = 0; i < config.batch; ++i) {
          const DqnTransition& tr = replay[picks[i]];
          featurize(SystemState{tr.tau, tr.h}, M, env.channel().levels, config.tau_norm,
                    batch.s.col(i).data());
          featurize(SystemState{tr.tau2, tr.h2}, M, env.channel().levels, config.tau_norm,
                    batch.s_next.col(i).data());
          batch.a[i] = tr.a;
          batch.hat[i] = tr.hat;
          batch.tilde[i] = tr.tilde;
          batch.r[i] = tr.r;
        }
        const auto res = se_dqn_loss(qnet, target, batch, static_cast<float>(config.gamma),
                                     static_cast<float>(config.alpha1));
        opt.step(qnet, res.grads, lr);
        loss_acc += res.loss;
        ++updates;
      }

      ++result.env_steps;
      if (result.env_steps % config.target_period == 0)
        sync_target(target, qnet, SyncMode::hard);
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
  result.qnet = std::move(qnet);
  return result;
}

}  // namespace remsched
