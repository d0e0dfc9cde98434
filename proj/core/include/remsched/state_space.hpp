#pragma once

#include <vector>

#include "remsched/channel_model.hpp"

namespace remsched {

/// All channel assignments satisfying the scheduling constraint, ordered
/// lexicographically by (sensor on channel 1, sensor on channel 2, ...).
/// There are N!/(N-M)! of them; counts above `cap` raise CapacityError.
std::vector<ScheduleAction> enumerate_actions(int sensors, int channels, long cap = 1 << 20);

/// Number of valid assignments, with overflow/capacity guard.
long count_actions(int sensors, int channels, long cap = 1 << 20);

/// Dense bijective indexing of the truncated state space
/// (tau in [1, tau_max]^N) x (h in [1, levels]^(N x M)).
///
/// index = tau_index * h_count + h_index, both mixed-radix with sensor 0 as
/// the most significant digit (row-major over (sensor, channel) for h).
class StateSpace {
 public:
  StateSpace(int sensors, int channels, int levels, int tau_max, long state_cap = 64L << 20);

  int sensors() const { return sensors_; }
  int channels() const { return channels_; }
  int levels() const { return levels_; }
  int tau_max() const { return tau_max_; }
  long tau_count() const { return tau_count_; }
  long h_count() const { return h_count_; }
  long size() const { return tau_count_ * h_count_; }

  long encode_tau(const std::vector<int>& tau) const;
  long encode_h(const std::vector<int>& h) const;
  long encode(const SystemState& s) const { return encode_tau(s.tau) * h_count_ + encode_h(s.h); }
  /// Like encode, but AoI components above tau_max are clamped first (for
  /// table lookups of states reached in an unclamped environment).
  long encode_clamped(const SystemState& s) const;

  void decode_tau(long tau_index, std::vector<int>& tau) const;
  void decode_h(long h_index, std::vector<int>& h) const;
  SystemState decode(long index) const;

  long tau_index_of(long index) const { return index / h_count_; }
  long h_index_of(long index) const { return index % h_count_; }

 private:
  int sensors_, channels_, levels_, tau_max_;
  long tau_count_, h_count_;
};

}  // namespace remsched
