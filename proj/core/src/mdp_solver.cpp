#include "remsched/mdp_solver.hpp"

#include <cmath>

namespace remsched {

std::vector<std::pair<std::vector<int>, double>> aoi_transitions(const SystemState& state,
                                                                 const ScheduleAction& action,
                                                                 const ChannelModel& model,
                                                                 int tau_max) {
  validate_action(action, model.sensors, model.channels);

  // Unscheduled sensors age deterministically; each scheduled sensor splits
  // into a success branch (AoI resets to 1) and a failure branch.
  std::vector<int> aged(model.sensors);
  for (int n = 0; n < model.sensors; ++n)
    aged[n] = std::min(state.tau[n] + 1, tau_max);

  std::vector<std::pair<int, double>> scheduled;  // (sensor, success prob)
  for (int n = 0; n < model.sensors; ++n)
    if (action.a[n] > 0)
      scheduled.emplace_back(n, success_probability(model, n, action.a[n] - 1, state));

  std::vector<std::pair<std::vector<int>, double>> out;
  const size_t k = scheduled.size();
  out.reserve(1u << k);
  for (size_t mask = 0; mask < (1u << k); ++mask) {
    std::vector<int> tau = aged;
    double prob = 1.0;
    for (size_t b = 0; b < k; ++b) {
      const auto& [n, p] = scheduled[b];
      if (mask & (1u << b)) {
        tau[n] = 1;
        prob *= p;
      } else {
        prob *= 1.0 - p;
      }
    }
    if (prob > 0) out.emplace_back(std::move(tau), prob);
  }
  return out;
}

MdpModel::MdpModel(StateSpace space, ChannelModel channel, std::vector<ProcessModel> processes,
                   RewardKind reward_kind)
    : space_(std::move(space)),
      channel_(std::move(channel)),
      processes_(std::move(processes)),
      reward_kind_(reward_kind) {
  if (processes_.size() != static_cast<size_t>(channel_.sensors))
    throw ValidationError("MdpModel: need one process per sensor");
  if (space_.sensors() != channel_.sensors || space_.channels() != channel_.channels ||
      space_.levels() != channel_.levels)
    throw ValidationError("MdpModel: state space does not match the channel model");

  tables_.reserve(processes_.size());
  for (const auto& p : processes_) tables_.emplace_back(p, space_.tau_max());
  actions_ = enumerate_actions(space_.sensors(), space_.channels());

  tau_reward_.resize(space_.tau_count());
  std::vector<int> tau;
  for (long i = 0; i < space_.tau_count(); ++i) {
    space_.decode_tau(i, tau);
    tau_reward_[i] = reward(tables_, tau, reward_kind_);
  }

  h_dist_.resize(space_.h_count());
  std::vector<int> h;
  for (long i = 0; i < space_.h_count(); ++i) {
    space_.decode_h(i, h);
    double p = 1.0;
    for (int n = 0; n < channel_.sensors; ++n)
      for (int m = 0; m < channel_.channels; ++m)
        p *= channel_.q(n, m)[h[static_cast<size_t>(n) * channel_.channels + m] - 1];
    h_dist_[i] = p;
  }
}

namespace {

// Shared scratch for one Bellman backup pass over the state space.
struct SweepContext {
  const MdpModel& model;
  const StateSpace& space;
  std::vector<long> tau_stride;
  std::vector<int> tau_digits;  // current AoI values
  std::vector<int> h_digits;    // current levels
  std::vector<long> inc_term;   // aged-and-clamped digit * stride, per sensor

  explicit SweepContext(const MdpModel& m)
      : model(m), space(m.space()), tau_stride(space.sensors()),
        tau_digits(space.sensors()),
        h_digits(static_cast<size_t>(space.sensors()) * space.channels()),
        inc_term(space.sensors()) {
    tau_stride[space.sensors() - 1] = 1;
    for (int n = space.sensors() - 2; n >= 0; --n)
      tau_stride[n] = tau_stride[n + 1] * space.tau_max();
  }

  void load_state(long tau_index, long h_index) {
    space.decode_tau(tau_index, tau_digits);
    space.decode_h(h_index, h_digits);
    for (int n = 0; n < space.sensors(); ++n) {
      const int aged = std::min(tau_digits[n] + 1, space.tau_max());
      inc_term[n] = static_cast<long>(aged - 1) * tau_stride[n];
    }
  }

  // Expected marginalized continuation value of one action at the loaded state.
  double action_value(const ScheduleAction& action, const std::vector<double>& g) const {
    long base = 0;
    for (int n = 0; n < space.sensors(); ++n) base += inc_term[n];

    int k = 0;
    int sched_sensor[32];
    double sched_p[32];
    for (int n = 0; n < space.sensors(); ++n) {
      if (action.a[n] > 0) {
        const int level = h_digits[static_cast<size_t>(n) * space.channels() + action.a[n] - 1];
        sched_sensor[k] = n;
        sched_p[k] = model.channel().success_at_level(level);
        ++k;
      }
    }
    double value = 0;
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      double prob = 1.0;
      long idx = base;
      for (int b = 0; b < k; ++b) {
        if (mask & (1u << b)) {
          prob *= sched_p[b];
          idx -= inc_term[sched_sensor[b]];  // success: AoI digit drops to 0
        } else {
          prob *= 1.0 - sched_p[b];
        }
      }
      value += prob * g[idx];
    }
    return value;
  }
};

// g[tau_index] = E_{H+}[ V(tau_index, H+) ]; the fading factor is independent
// of state and action, so this marginal is shared by every backup in a sweep.
void marginalize(const MdpModel& model, const std::vector<double>& v, std::vector<double>& g) {
  const long tc = model.space().tau_count();
  const long hc = model.space().h_count();
  const auto& hd = model.h_distribution();
  g.assign(tc, 0.0);
  for (long t = 0; t < tc; ++t) {
    const double* row = v.data() + t * hc;
    double acc = 0;
    for (long h = 0; h < hc; ++h) acc += hd[h] * row[h];
    g[t] = acc;
  }
}

}  // namespace

ValueTable value_iteration(const MdpModel& model, const ViOptions& options) {
  if (options.gamma < 0.0 || options.gamma >= 1.0)
    throw ValidationError("value_iteration: gamma must lie in [0,1)");
  if (options.tol <= 0) throw ValidationError("value_iteration: tol must be positive");

  const StateSpace& space = model.space();
  const long tc = space.tau_count(), hc = space.h_count();
  std::vector<double> v(space.size(), 0.0), next(space.size(), 0.0), g;
  SweepContext ctx(model);

  ValueTable out;
  out.gamma = options.gamma;
  out.tol = options.tol;
  double residual = 0;
  for (long sweep = 0; sweep < options.max_iter; ++sweep) {
    marginalize(model, v, g);
    residual = 0;
    for (long t = 0; t < tc; ++t) {
      const double r = model.reward_of_tau(t);
      for (long h = 0; h < hc; ++h) {
        ctx.load_state(t, h);
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& a : model.actions()) {
          const double val = ctx.action_value(a, g);
          if (val > best) best = val;
        }
        const long s = t * hc + h;
        next[s] = r + options.gamma * best;
        residual = std::max(residual, std::abs(next[s] - v[s]));
      }
    }
    v.swap(next);
    ++out.sweeps;
    if (residual <= options.tol) {
      out.v = std::move(v);
      out.residual = residual;
      return out;
    }
  }
  throw ConvergenceError("value iteration did not converge", residual);
}

QTable q_from_value(const MdpModel& model, const ValueTable& table) {
  const StateSpace& space = model.space();
  const long tc = space.tau_count(), hc = space.h_count();
  QTable q;
  q.n_actions = static_cast<int>(model.actions().size());
  q.q.resize(space.size() * q.n_actions);
  std::vector<double> g;
  marginalize(model, table.v, g);
  SweepContext ctx(model);
  for (long t = 0; t < tc; ++t) {
    const double r = model.reward_of_tau(t);
    for (long h = 0; h < hc; ++h) {
      ctx.load_state(t, h);
      const long s = t * hc + h;
      for (int a = 0; a < q.n_actions; ++a)
        q.at(s, a) = r + table.gamma * ctx.action_value(model.actions()[a], g);
    }
  }
  return q;
}

Policy greedy_policy(const QTable& q) {
  Policy p;
  const long states = static_cast<long>(q.q.size()) / q.n_actions;
  p.action.resize(states);
  for (long s = 0; s < states; ++s) {
    int best = 0;
    for (int a = 1; a < q.n_actions; ++a)
      if (q.at(s, a) > q.at(s, best)) best = a;  // ties keep the lowest index
    p.action[s] = best;
  }
  return p;
}

std::vector<int> SolvedMdp::optimal_actions(long s, double slack) const {
  std::vector<int> out;
  for (int a = 0; a < q.n_actions; ++a)
    if (optimal(s, a, slack)) out.push_back(a);
  return out;
}

SolvedMdp solve_mdp(MdpModel model, const ViOptions& options) {
  ValueTable v = value_iteration(model, options);
  QTable q = q_from_value(model, v);
  Policy p = greedy_policy(q);
  return SolvedMdp{std::move(model), std::move(v), std::move(q), std::move(p)};
}

}  // namespace remsched
