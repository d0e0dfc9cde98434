#include "remsched/channel_model.hpp"

#include <cmath>
#include <string>

namespace remsched {

ChannelModel ChannelModel::make(int sensors, int channels, std::vector<double> drop_prob,
                                std::vector<std::vector<double>> dist) {
  if (sensors < 1 || channels < 1) throw ValidationError("need at least one sensor and channel");
  if (channels > sensors) throw ValidationError("channel count must not exceed sensor count");
  const int levels = static_cast<int>(drop_prob.size());
  if (levels < 1) throw ValidationError("need at least one channel level");
  for (int i = 0; i < levels; ++i) {
    if (drop_prob[i] < 0.0 || drop_prob[i] > 1.0)
      throw ValidationError("drop probabilities must lie in [0,1]");
    if (i > 0 && drop_prob[i] > drop_prob[i - 1])
      throw ValidationError("drop probabilities must be non-increasing in the channel level");
  }
  if (dist.size() != static_cast<size_t>(sensors) * channels)
    throw ValidationError("need one level distribution per (sensor, channel) pair");
  for (const auto& q : dist) {
    if (q.size() != static_cast<size_t>(levels))
      throw ValidationError("level distribution has wrong length");
    double sum = 0;
    for (double p : q) {
      if (p < 0.0 || p > 1.0) throw ValidationError("level probabilities must lie in [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ValidationError("level distribution must sum to 1");
  }
  ChannelModel m;
  m.sensors = sensors;
  m.channels = channels;
  m.levels = levels;
  m.drop_prob = std::move(drop_prob);
  m.dist = std::move(dist);
  return m;
}

double ChannelModel::success_at_level(int level) const {
  if (level < 1 || level > levels)
    throw ValidationError("channel level out of range: " + std::to_string(level));
  return 1.0 - drop_prob[level - 1];
}

bool satisfies_assignment_constraint(const ScheduleAction& action, int sensors, int channels) {
  if (static_cast<int>(action.a.size()) != sensors) return false;
  std::vector<int> users(channels, 0);
  for (int an : action.a) {
    if (an < 0 || an > channels) return false;
    if (an > 0) ++users[an - 1];
  }
  for (int u : users)
    if (u != 1) return false;
  return true;
}

void validate_action(const ScheduleAction& action, int sensors, int channels) {
  if (!satisfies_assignment_constraint(action, sensors, channels))
    throw ValidationError("schedule action violates the channel assignment constraint");
}

double success_probability(const ChannelModel& model, int sensor, int channel,
                           const SystemState& state) {
  if (sensor < 0 || sensor >= model.sensors) throw ValidationError("sensor index out of range");
  if (channel < 0 || channel >= model.channels) throw ValidationError("channel index out of range");
  return model.success_at_level(state.level(sensor, channel, model.channels));
}

std::vector<int> sample_channel_matrix(const ChannelModel& model, std::mt19937_64& rng) {
  std::vector<int> h(static_cast<size_t>(model.sensors) * model.channels);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (size_t i = 0; i < h.size(); ++i) {
    const auto& q = model.dist[i];
    double u = unit(rng);
    int level = model.levels;  // guard against rounding leftovers
    double acc = 0;
    for (int l = 0; l < model.levels; ++l) {
      acc += q[l];
      if (u < acc) {
        level = l + 1;
        break;
      }
    }
    h[i] = level;
  }
  return h;
}

}  // namespace remsched
