#include "remsched/state_space.hpp"

#include <string>

namespace remsched {

long count_actions(int sensors, int channels, long cap) {
  if (channels > sensors || sensors < 1 || channels < 1)
    throw ValidationError("count_actions: need 1 <= channels <= sensors");
  long count = 1;
  for (int k = 0; k < channels; ++k) {
    count *= (sensors - k);
    if (count > cap)
      throw CapacityError("action space of size > " + std::to_string(cap) +
                          " for " + std::to_string(sensors) + " sensors, " +
                          std::to_string(channels) + " channels");
  }
  return count;
}

namespace {

void extend(std::vector<ScheduleAction>& out, std::vector<int>& a, std::vector<bool>& used,
            int channel, int sensors, int channels) {
  if (channel > channels) {
    out.push_back(ScheduleAction{a});
    return;
  }
  for (int n = 0; n < sensors; ++n) {
    if (used[n]) continue;
    used[n] = true;
    a[n] = channel;
    extend(out, a, used, channel + 1, sensors, channels);
    a[n] = 0;
    used[n] = false;
  }
}

}  // namespace

std::vector<ScheduleAction> enumerate_actions(int sensors, int channels, long cap) {
  const long count = count_actions(sensors, channels, cap);
  std::vector<ScheduleAction> out;
  out.reserve(count);
  std::vector<int> a(sensors, 0);
  std::vector<bool> used(sensors, false);
  extend(out, a, used, 1, sensors, channels);
  return out;
}

StateSpace::StateSpace(int sensors, int channels, int levels, int tau_max, long state_cap)
    : sensors_(sensors), channels_(channels), levels_(levels), tau_max_(tau_max) {
  if (sensors < 1 || channels < 1 || channels > sensors)
    throw ValidationError("StateSpace: need 1 <= channels <= sensors");
  if (levels < 1) throw ValidationError("StateSpace: need at least one channel level");
  if (tau_max < 2) throw ValidationError("StateSpace: tau_max must be >= 2");
  tau_count_ = 1;
  for (int n = 0; n < sensors; ++n) {
    tau_count_ *= tau_max;
    if (tau_count_ > state_cap) throw CapacityError("truncated AoI space exceeds capacity");
  }
  h_count_ = 1;
  for (int i = 0; i < sensors * channels; ++i) {
    h_count_ *= levels;
    if (h_count_ > state_cap || tau_count_ > state_cap / h_count_)
      throw CapacityError("truncated state space exceeds capacity");
  }
}

long StateSpace::encode_tau(const std::vector<int>& tau) const {
  if (tau.size() != static_cast<size_t>(sensors_))
    throw ValidationError("encode_tau: wrong AoI vector length");
  long idx = 0;
  for (int n = 0; n < sensors_; ++n) {
    if (tau[n] < 1 || tau[n] > tau_max_) throw ValidationError("encode_tau: AoI out of range");
    idx = idx * tau_max_ + (tau[n] - 1);
  }
  return idx;
}

long StateSpace::encode_h(const std::vector<int>& h) const {
  if (h.size() != static_cast<size_t>(sensors_) * channels_)
    throw ValidationError("encode_h: wrong channel matrix size");
  long idx = 0;
  for (size_t i = 0; i < h.size(); ++i) {
    if (h[i] < 1 || h[i] > levels_) throw ValidationError("encode_h: level out of range");
    idx = idx * levels_ + (h[i] - 1);
  }
  return idx;
}

long StateSpace::encode_clamped(const SystemState& s) const {
  long idx = 0;
  for (int n = 0; n < sensors_; ++n) {
    int t = s.tau[n];
    if (t < 1) throw ValidationError("encode_clamped: AoI out of range");
    if (t > tau_max_) t = tau_max_;
    idx = idx * tau_max_ + (t - 1);
  }
  return idx * h_count_ + encode_h(s.h);
}

void StateSpace::decode_tau(long tau_index, std::vector<int>& tau) const {
  tau.resize(sensors_);
  for (int n = sensors_ - 1; n >= 0; --n) {
    tau[n] = static_cast<int>(tau_index % tau_max_) + 1;
    tau_index /= tau_max_;
  }
}

void StateSpace::decode_h(long h_index, std::vector<int>& h) const {
  h.resize(static_cast<size_t>(sensors_) * channels_);
  for (int i = static_cast<int>(h.size()) - 1; i >= 0; --i) {
    h[i] = static_cast<int>(h_index % levels_) + 1;
    h_index /= levels_;
  }
}

SystemState StateSpace::decode(long index) const {
  SystemState s;
  decode_tau(index / h_count_, s.tau);
  decode_h(index % h_count_, s.h);
  return s;
}

}  // namespace remsched
