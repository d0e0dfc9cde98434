#pragma once

#include <functional>
#include <optional>
#include <random>

#include "remsched/channel_model.hpp"

namespace remsched {

/// Network-input encoding of a state: AoI components scaled by 1/tau_norm
/// followed by channel levels scaled to [0,1], row-major.
int feature_dim(int sensors, int channels);
void featurize(const SystemState& state, int channels, int levels, double tau_norm, float* out);

/// Uniform draw over all valid assignments without enumerating them.
ScheduleAction random_valid_action(int sensors, int channels, std::mt19937_64& rng);

/// Greedy action of the agent at an arbitrary state (argmax for value nets,
/// mapped actor output for policy nets).
using PolicyProbe = std::function<ScheduleAction(const SystemState&)>;

struct SeParams {
  double xi = 0;                         // probability of jumping to a strictly better channel
  bool tight = false;                    // additionally check the channel-level threshold
  bool disable_channel_threshold = false;  // ablation: skip the tight-stage check
};

/// Threshold-guided action inference. Per sensor, the action at the state with
/// that sensor's AoI lowered by one proposes its channel (optionally swapped
/// for a strictly better one with probability xi); sensors whose proposal is
/// idle, and sensors already at AoI 1, copy the greedy component. In tight
/// mode a proposal must survive lowering its channel level by one (vacuous at
/// level 1). If no channel is claimed twice, unclaimed channels are filled
/// with uniformly random distinct unscheduled sensors and the completed action
/// is returned; otherwise nullopt (caller falls back to the greedy action).
std::optional<ScheduleAction> se_infer(const SystemState& state, const ChannelModel& model,
                                       const PolicyProbe& probe, const ScheduleAction& greedy,
                                       const SeParams& params, std::mt19937_64& rng);

}  // namespace remsched
