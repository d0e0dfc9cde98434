#include "remsched/se_select.hpp"

#include <algorithm>
#include <numeric>

namespace remsched {

int feature_dim(int sensors, int channels) { return sensors + sensors * channels; }

void featurize(const SystemState& state, int channels, int levels, double tau_norm, float* out) {
  const int sensors = static_cast<int>(state.tau.size());
  for (int n = 0; n < sensors; ++n) out[n] = static_cast<float>(state.tau[n] / tau_norm);
  const float denom = levels > 1 ? static_cast<float>(levels - 1) : 1.0f;
  for (int i = 0; i < sensors * channels; ++i)
    out[sensors + i] = static_cast<float>(state.h[i] - 1) / denom;
}

ScheduleAction random_valid_action(int sensors, int channels, std::mt19937_64& rng) {
  // Partial Fisher-Yates: the first `channels` slots become a uniformly random
  // ordered arrangement; slot m-1 holds the sensor on channel m.
  std::vector<int> pool(sensors);
  std::iota(pool.begin(), pool.end(), 0);
  ScheduleAction action;
  action.a.assign(sensors, 0);
  for (int m = 0; m < channels; ++m) {
    std::uniform_int_distribution<int> d(m, sensors - 1);
    std::swap(pool[m], pool[d(rng)]);
    action.a[pool[m]] = m + 1;
  }
  return action;
}

namespace {

/// Completes a per-sensor proposal into a full assignment, or reports failure
/// when two sensors claim one channel. Unclaimed channels are matched, in
/// ascending channel order, to uniformly random distinct unscheduled sensors.
std::optional<ScheduleAction> finalize(const std::vector<int>& proposal, int sensors,
                                       int channels, std::mt19937_64& rng) {
  std::vector<int> claims(channels, 0);
  for (int m : proposal)
    if (m > 0) ++claims[m - 1];
  for (int c : claims)
    if (c > 1) return std::nullopt;

  ScheduleAction action{proposal};
  std::vector<int> idle;
  for (int n = 0; n < sensors; ++n)
    if (proposal[n] == 0) idle.push_back(n);
  for (int m = 0; m < channels; ++m) {
    if (claims[m] == 1) continue;
    std::uniform_int_distribution<size_t> d(0, idle.size() - 1);
    const size_t pick = d(rng);
    action.a[idle[pick]] = m + 1;
    idle.erase(idle.begin() + pick);
  }
  return action;
}

}  // namespace

std::optional<ScheduleAction> se_infer(const SystemState& state, const ChannelModel& model,
                                       const PolicyProbe& probe, const ScheduleAction& greedy,
                                       const SeParams& params, std::mt19937_64& rng) {
  const int N = model.sensors, M = model.channels;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> proposal(N, 0);

  for (int n = 0; n < N; ++n) {
    if (state.tau[n] <= 1) {  // AoI cannot be lowered; no structural hint
      proposal[n] = greedy.a[n];
      continue;
    }
    SystemState lowered = state;
    --lowered.tau[n];
    const int hint = probe(lowered).a[n];
    if (hint == 0) {
      proposal[n] = greedy.a[n];
      continue;
    }
    proposal[n] = hint;
    const int base_level = state.level(n, hint - 1, M);
    std::vector<int> better;
    for (int m = 0; m < M; ++m)
      if (state.level(n, m, M) > base_level) better.push_back(m + 1);
    if (!better.empty() && unit(rng) < params.xi) {
      std::uniform_int_distribution<size_t> d(0, better.size() - 1);
      proposal[n] = better[d(rng)];
    }
  }

  if (params.tight && !params.disable_channel_threshold) {
    for (int n = 0; n < N; ++n) {
      const int m = proposal[n];
      if (m == 0) continue;
      if (state.level(n, m - 1, M) <= 1) continue;  // no lower level to test against
      SystemState lowered = state;
      --lowered.h[static_cast<size_t>(n) * M + (m - 1)];
      if (probe(lowered).a[n] != m) proposal[n] = greedy.a[n];
    }
  }

  return finalize(proposal, N, M, rng);
}

}  // namespace remsched
