#pragma once

#include <random>
#include <vector>

#include "remsched/errors.hpp"

namespace remsched {

/// Quantized i.i.d. block-fading channels between sensors and receiver.
/// Level 1 is the worst channel state, `levels` the best. Immutable after
/// construction; safe for concurrent reads.
struct ChannelModel {
  int sensors = 0;
  int channels = 0;
  int levels = 0;
  std::vector<double> drop_prob;            // per level, non-increasing
  std::vector<std::vector<double>> dist;    // [n * channels + m] -> pmf over levels

  static ChannelModel make(int sensors, int channels, std::vector<double> drop_prob,
                           std::vector<std::vector<double>> dist);

  const std::vector<double>& q(int sensor, int channel) const {
    return dist[static_cast<size_t>(sensor) * channels + channel];
  }

  /// Packet success rate at a given channel level (1-based).
  double success_at_level(int level) const;
};

/// AoI vector plus the current channel-state matrix (row-major sensors x channels).
struct SystemState {
  std::vector<int> tau;
  std::vector<int> h;

  int level(int sensor, int channel, int channels) const {
    return h[static_cast<size_t>(sensor) * channels + channel];
  }
  bool operator==(const SystemState&) const = default;
};

/// Per-sensor channel assignment: 0 = idle, m in 1..channels otherwise.
struct ScheduleAction {
  std::vector<int> a;
  bool operator==(const ScheduleAction&) const = default;
};

/// True iff every channel is assigned to exactly one sensor and no sensor
/// holds more than one channel.
bool satisfies_assignment_constraint(const ScheduleAction& action, int sensors, int channels);

/// Throws ValidationError if the assignment constraint is violated. Actions
/// are never silently repaired.
void validate_action(const ScheduleAction& action, int sensors, int channels);

/// Success probability for sensor n on channel m under the current state.
double success_probability(const ChannelModel& model, int sensor, int channel,
                           const SystemState& state);

/// Fresh fading draw: every (sensor, channel) level sampled independently from
/// its pmf, row-major order.
std::vector<int> sample_channel_matrix(const ChannelModel& model, std::mt19937_64& rng);

}  // namespace remsched
